"""File formats: forest model files (JSON), instance rows, stats CSV.

A model file is a versioned JSON document::

    {
      "format": "rfreasons-forest",
      "format_version": 1,
      "var_count": 4,
      "feature_names": ["fragrant", ...] | null,
      "trees": [{"var": 4, "low": {"leaf": 0}, "high": {...}}, ...]
    }

Instances are one comma-separated 0/1 row per line, with an optional
leading header row of feature names.  Structural validation (read-once,
index ranges) happens at load time, not per operation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import IO, Sequence

from .core import DecisionTree, ModelFormatError, RandomForest

MODEL_FORMAT = "rfreasons-forest"
MODEL_FORMAT_VERSION = 1

STATS_COLUMNS = (
    "instance",
    "kind",
    "size",
    "elapsed",
    "optimal",
    "cost",
    "probability",
    "reason",
    "error",
)
TRAJECTORY_COLUMNS = ("instance", "kind", "elapsed", "cost")


def forest_to_document(forest: RandomForest) -> dict:
    return {
        "format": MODEL_FORMAT,
        "format_version": MODEL_FORMAT_VERSION,
        "var_count": forest.var_count,
        "feature_names": list(forest.feature_names) if forest.feature_names else None,
        "trees": [t.to_nested() for t in forest.trees],
    }


def document_to_forest(doc: dict) -> RandomForest:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    fmt = doc.get("format", MODEL_FORMAT)
    if fmt != MODEL_FORMAT:
        raise ModelFormatError(f"unknown model format {fmt!r}")
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {version!r}")
    try:
        var_count = int(doc["var_count"])
        trees_doc = doc["trees"]
    except KeyError as e:
        raise ModelFormatError(f"model document missing {e.args[0]!r}") from None
    if not isinstance(trees_doc, list) or not trees_doc:
        raise ModelFormatError("model document needs a non-empty 'trees' list")
    trees = [DecisionTree.from_nested(t, var_count) for t in trees_doc]
    names = doc.get("feature_names")
    return RandomForest(trees, names)


def dump_forest(forest: RandomForest, target: str | IO[str]) -> None:
    text = json.dumps(forest_to_document(forest), indent=2) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)


def load_forest(source: str | IO[str]) -> RandomForest:
    """Load and structurally validate a model file (path or file object)."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"not valid JSON: {e}") from None
    return document_to_forest(doc)


class InstanceFormatError(ValueError):
    """Bad instance row; names the row and column."""


def parse_instances(
    source: str | IO[str], var_count: int | None = None
) -> tuple[list[tuple[int, ...]], list[str] | None]:
    """Read instance rows, returning (instances, header or None).

    A first row whose cells are not all 0/1 is treated as a header of
    feature names.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as fh:
            text = fh.read()
    rows = [r for r in csv.reader(io.StringIO(text)) if any(cell.strip() for cell in r)]
    header = None

    def numeric(cell: str) -> bool:
        try:
            int(cell.strip())
            return True
        except ValueError:
            return False

    # a leading row with any non-numeric cell is a header of feature names;
    # numeric-but-not-binary cells are data errors, not names
    if rows and not all(numeric(cell) for cell in rows[0]):
        header = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
    instances = []
    for r, row in enumerate(rows, 1):
        bits = []
        for c, cell in enumerate(row, 1):
            cell = cell.strip()
            if cell not in ("0", "1"):
                raise InstanceFormatError(
                    f"row {r}, column {c}: expected 0 or 1, got {cell!r}"
                )
            bits.append(int(cell))
        if var_count is not None and len(bits) != var_count:
            raise InstanceFormatError(
                f"row {r}: expected {var_count} values, got {len(bits)}"
            )
        instances.append(tuple(bits))
    return instances, header


def write_instances(
    instances: Sequence[Sequence[int]],
    target: str | IO[str],
    header: Sequence[str] | None = None,
) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    if header:
        writer.writerow(header)
    for x in instances:
        writer.writerow(list(x))
    text = buf.getvalue()
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)


@dataclass(frozen=True)
class StatsRow:
    """One per (instance, kind): what was computed and how long it took."""

    instance: int
    kind: str
    size: int | None = None
    elapsed: float | None = None
    optimal: bool | None = None
    cost: int | None = None
    probability: str | None = None
    reason: str | None = None
    error: str | None = None

    def as_csv_row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, float):
                return f"{v:.6f}"
            return str(v)

        return [
            fmt(v)
            for v in (
                self.instance,
                self.kind,
                self.size,
                self.elapsed,
                self.optimal,
                self.cost,
                self.probability,
                self.reason,
                self.error,
            )
        ]


def write_stats(rows: Sequence[StatsRow], target: str | IO[str]) -> None:
    """Emit the stats table plus a '#'-prefixed per-kind summary block
    (mean and standard deviation of reason sizes)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(STATS_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv_row())
    by_kind: dict[str, list[int]] = {}
    for row in rows:
        if row.size is not None and row.error is None:
            by_kind.setdefault(row.kind, []).append(row.size)
    for kind in sorted(by_kind):
        sizes = by_kind[kind]
        mean = sum(sizes) / len(sizes)
        var = sum((s - mean) ** 2 for s in sizes) / len(sizes)
        buf.write(
            f"# summary kind={kind} count={len(sizes)} "
            f"mean_size={mean:.4f} stddev_size={math.sqrt(var):.4f}\n"
        )
    text = buf.getvalue()
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)
