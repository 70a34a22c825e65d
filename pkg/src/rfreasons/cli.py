"""Command-line front end.

Subcommands: classify, explain, convert, negate, stats, fixture-gen.
Exit codes: 0 success, 2 no comprehensible reason exists, 3 a timeout
left only a partial (but still valid) result, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from . import dimacs, models
from .core import (
    Clause,
    DecisionTree,
    ModelFormatError,
    RandomForest,
    Term,
    cnf_to_forest,
    dnf_to_forest,
)
from .explain import (
    DEFAULT_SEED,
    DeltaProbableOracle,
    ExplanationTimeout,
    ForestSatOracle,
    LinearModel,
    MajorityOracle,
    Prioritization,
    Reason,
    ReasonKind,
    comprehensible_reason,
    delta_probable_reason_dt,
    direct_reason,
    inclusion_preferred_reason,
    lime_linear_reason,
    majoritary_reason,
    majoritary_reason_multi,
    oracle_for_instance,
    sufficient_reason_dt,
    sufficient_reason_rf,
)
from .models import InstanceFormatError, StatsRow
from .optimize import (
    OptimizationBudgetError,
    WeightMap,
    approx_minimal_reason_dt,
    majority_wcnf,
    minimal_majoritary_reason,
    minimal_sufficient_reason_dt,
    minimal_weight_majoritary_reason,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_COMPREHENSIBLE = 2
EXIT_PARTIAL = 3

KINDS = (
    "direct",
    "sufficient",
    "majoritary",
    "minimal-majoritary",
    "minimal-weight",
    "minimal-sufficient",
    "delta-probable",
    "comprehensible",
    "inclusion-preferred",
    "lime",
    "approx-minimal",
)


class CliError(Exception):
    pass


def _feature_index(token: str, forest: RandomForest) -> int:
    token = token.strip()
    if forest.feature_names and token in forest.feature_names:
        return forest.feature_names.index(token) + 1
    name = token[1:] if token.lower().startswith("x") else token
    try:
        var = int(name)
    except ValueError:
        raise CliError(f"unknown feature {token!r}") from None
    if not 1 <= var <= forest.var_count:
        raise CliError(f"feature index {var} out of range 1..{forest.var_count}")
    return var


def _parse_instance(text: str, var_count: int) -> tuple[int, ...]:
    cells = text.replace(",", " ").split()
    if len(cells) == 1 and len(cells[0]) > 1:
        cells = list(cells[0])
    bits = []
    for c, cell in enumerate(cells, 1):
        if cell not in ("0", "1"):
            raise CliError(f"instance column {c}: expected 0 or 1, got {cell!r}")
        bits.append(int(cell))
    if len(bits) != var_count:
        raise CliError(f"instance has {len(bits)} values, model expects {var_count}")
    return tuple(bits)


def _parse_strata(text: str, forest: RandomForest) -> Prioritization:
    strata = []
    for group in text.split(";"):
        group = group.strip()
        if not group:
            raise CliError("empty stratum in --strata")
        strata.append([_feature_index(t, forest) for t in group.split(",")])
    return Prioritization(strata)


def _parse_weights(text: str, forest: RandomForest) -> WeightMap:
    weights = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise CliError(f"--weights entries look like x1:5, got {item!r}")
        name, _, value = item.partition(":")
        try:
            weights[_feature_index(name, forest)] = int(value)
        except ValueError:
            raise CliError(f"bad weight value in {item!r}") from None
    return WeightMap(weights)


def _parse_order(text: str, forest: RandomForest) -> tuple[int, ...]:
    order = tuple(_feature_index(t, forest) for t in text.split(","))
    if len(set(order)) != len(order):
        raise CliError("--order repeats a feature")
    return order


def _load_model(path: str) -> RandomForest:
    try:
        return models.load_forest(path)
    except FileNotFoundError:
        raise CliError(f"model file not found: {path}") from None
    except ModelFormatError as e:
        raise CliError(f"bad model file {path}: {e}") from None


# ---------------------------------------------------------------------------
# explain


@dataclass
class ExplainSettings:
    kind: str
    delta: str | None = None
    strata: str | None = None
    intelligible: str | None = None
    weights: str | None = None
    notion: str = "majority"
    permutations: int | None = None
    seed: int = DEFAULT_SEED
    timeout: float | None = None
    order: str | None = None
    linear_weights: str | None = None


def _single_tree(forest: RandomForest, kind: str) -> DecisionTree:
    if forest.tree_count != 1:
        raise CliError(f"--kind {kind} needs a single-tree model")
    return forest.trees[0]


def compute_reason(
    forest: RandomForest, x: tuple[int, ...], s: ExplainSettings
) -> Reason | None:
    """Dispatch one explanation request; None means no comprehensible
    reason exists."""
    order = _parse_order(s.order, forest) if s.order else None
    kind = s.kind
    if kind != "delta-probable" and s.delta is not None:
        raise CliError("--delta only applies to --kind delta-probable")
    if kind == "direct":
        return direct_reason(forest, x)
    if kind == "sufficient":
        if forest.tree_count == 1:
            return sufficient_reason_dt(forest.trees[0], x, order)
        return sufficient_reason_rf(forest, x, order, budget=s.timeout)
    if kind == "majoritary":
        if s.permutations and s.permutations > 1:
            return majoritary_reason_multi(forest, x, s.permutations, s.seed)
        return majoritary_reason(forest, x, order)
    if kind == "minimal-majoritary":
        return minimal_majoritary_reason(forest, x, budget=s.timeout)
    if kind == "minimal-weight":
        if not s.weights:
            raise CliError("--kind minimal-weight needs --weights")
        return minimal_weight_majoritary_reason(
            forest, x, _parse_weights(s.weights, forest), budget=s.timeout
        )
    if kind == "minimal-sufficient":
        return minimal_sufficient_reason_dt(_single_tree(forest, kind), x, s.timeout)
    if kind == "approx-minimal":
        return approx_minimal_reason_dt(_single_tree(forest, kind), x)
    if kind == "delta-probable":
        if s.delta is None:
            raise CliError("--kind delta-probable needs --delta")
        return delta_probable_reason_dt(_single_tree(forest, kind), x, s.delta, order)
    if kind == "comprehensible":
        if not s.intelligible:
            raise CliError("--kind comprehensible needs --intelligible")
        keep = [_feature_index(t, forest) for t in s.intelligible.split(",")]
        oracle = oracle_for_instance(forest, x, s.notion)
        reason = comprehensible_reason(oracle, x, keep)
        if reason is not None:
            reason.extras["notion"] = s.notion
        return reason
    if kind == "inclusion-preferred":
        if not s.strata:
            raise CliError("--kind inclusion-preferred needs --strata")
        oracle = oracle_for_instance(forest, x, s.notion)
        reason = inclusion_preferred_reason(oracle, x, _parse_strata(s.strata, forest))
        reason.extras["notion"] = s.notion
        return reason
    if kind == "lime":
        if not s.linear_weights:
            raise CliError("--kind lime needs --linear-weights")
        weights = [w.strip() for w in s.linear_weights.split(",")]
        if len(weights) != forest.var_count:
            raise CliError("--linear-weights length must match the feature count")
        model = LinearModel(weights)
        if model.evaluate(x) != forest.evaluate(x):
            raise CliError(
                "the linear model disagrees with the forest on this instance"
            )
        return lime_linear_reason(model, x)
    raise CliError(f"unknown kind {s.kind!r}")


def validate_reason(forest: RandomForest, reason: Reason) -> None:
    """Re-check the output against its defining oracle; a failure here
    means an encoding bug and is a hard error."""
    x = reason.instance
    term = reason.term
    kind = reason.kind
    if kind in (ReasonKind.MAJORITARY, ReasonKind.MINIMAL_MAJORITARY, ReasonKind.MINIMAL_WEIGHT):
        normalized = forest if forest.evaluate(x) == 1 else forest.negated()
        ok = MajorityOracle(normalized).accepts(term)
    elif kind in (ReasonKind.DIRECT, ReasonKind.SUFFICIENT):
        normalized = forest if forest.evaluate(x) == 1 else forest.negated()
        if normalized.tree_count == 1:
            ok = normalized.trees[0].implied_by(term)
        else:
            ok = ForestSatOracle(normalized).accepts(term)
    elif kind is ReasonKind.DELTA_PROBABLE:
        normalized = forest if forest.evaluate(x) == 1 else forest.negated()
        delta = reason.extras.get("delta")
        ok = delta is not None and DeltaProbableOracle(
            normalized.single(), delta
        ).accepts(term)
    elif kind in (ReasonKind.COMPREHENSIBLE, ReasonKind.INCLUSION_PREFERRED):
        normalized = forest if forest.evaluate(x) == 1 else forest.negated()
        oracle = (
            MajorityOracle(normalized)
            if reason.extras.get("notion", "majority") == "majority"
            else ForestSatOracle(normalized)
        )
        ok = oracle.accepts(term)
        intelligible = reason.extras.get("intelligible")
        if intelligible is not None:
            ok = ok and term.variables() <= set(intelligible)
    else:  # lime validates against its own linear model, not the forest
        ok = term.covers(x)
    if not ok:
        raise AssertionError(
            f"validation failed: {kind.value} reason {term} rejected by its oracle"
        )


def reason_record(reason: Reason, forest: RandomForest) -> dict:
    prob = reason.extras.get("probability")
    return {
        "kind": reason.kind.value,
        "prediction": reason.extras.get("prediction"),
        "literals": list(reason.term.to_ints()),
        "rendered": reason.render(forest.feature_names),
        "size": reason.size,
        "cost": reason.cost,
        "optimal": reason.optimal,
        "elapsed": round(reason.elapsed, 6),
        "probability": str(prob) if prob is not None else None,
        "fallback": reason.extras.get("fallback"),
    }


def cmd_explain(args) -> int:
    forest = _load_model(args.model)
    x = _parse_instance(args.instance, forest.var_count)
    settings = ExplainSettings(
        kind=args.kind,
        delta=args.delta,
        strata=args.strata,
        intelligible=args.intelligible,
        weights=args.weights,
        notion=args.notion,
        permutations=args.permutations,
        seed=args.seed,
        timeout=args.timeout,
        order=args.order,
        linear_weights=args.linear_weights,
    )
    if args.export_wcnf:
        normalized = forest if forest.evaluate(x) == 1 else forest.negated()
        wm = _parse_weights(args.weights, forest) if args.weights else None
        with open(args.export_wcnf, "w") as fh:
            fh.write(dimacs.write_wcnf(majority_wcnf(normalized, x, wm)))
    partial = False
    try:
        reason = compute_reason(forest, x, settings)
    except OptimizationBudgetError as e:
        reason = e.fallback
        partial = True
    except ExplanationTimeout as e:
        reason = Reason(
            e.partial,
            ReasonKind.SUFFICIENT,
            x,
            optimal=False,
            extras={"prediction": forest.evaluate(x), "fallback": "timeout"},
        )
        partial = True
    if reason is None:
        print("no comprehensible reason")
        return EXIT_NO_COMPREHENSIBLE
    validate_reason(forest, reason)
    record = reason_record(reason, forest)
    if args.json:
        print(json.dumps(record))
    else:
        print(f"prediction: {record['prediction']}")
        print(f"reason ({record['kind']}): {record['rendered']}")
        print(f"size: {record['size']}")
        if record["cost"] is not None:
            print(f"cost: {record['cost']}")
        print(f"optimal: {'yes' if record['optimal'] else 'no'}")
        if record["probability"] is not None:
            print(f"probability: {record['probability']}")
        print(f"elapsed: {record['elapsed']}s")
        if record["fallback"]:
            print(f"fallback: {record['fallback']}")
    if partial or (
        settings.timeout is not None
        and reason.kind
        in (ReasonKind.MINIMAL_MAJORITARY, ReasonKind.MINIMAL_WEIGHT)
        and not reason.optimal
    ):
        return EXIT_PARTIAL
    return EXIT_OK


# ---------------------------------------------------------------------------
# classify / convert / negate / fixture-gen


def cmd_classify(args) -> int:
    forest = _load_model(args.model)
    instances, _ = models.parse_instances(args.instances, forest.var_count)
    for x in instances:
        print(forest.evaluate(x))
    return EXIT_OK


def _read_dnf_terms(text: str) -> tuple[list[Term], int]:
    var_count = None
    terms: list[Term] = []
    pending: list[int] = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        tokens = raw.split()
        if not tokens or tokens[0] == "c":
            continue
        if tokens[0] == "p":
            if len(tokens) != 4 or tokens[1] != "dnf":
                raise dimacs.DimacsError(line_no, f"malformed header {raw.strip()!r}")
            var_count = int(tokens[2])
            continue
        if var_count is None:
            raise dimacs.DimacsError(line_no, "expected 'p dnf <vars> <terms>' header")
        for tok in tokens:
            value = int(tok)
            if value == 0:
                terms.append(Term(pending))
                pending = []
            else:
                if abs(value) > var_count:
                    raise dimacs.DimacsError(line_no, f"literal {value} out of range")
                pending.append(value)
    if var_count is None:
        raise dimacs.DimacsError(1, "missing 'p dnf' header")
    if pending:
        raise dimacs.DimacsError(line_no, "unterminated term at end of input")
    return terms, var_count


def cmd_convert(args) -> int:
    with open(args.input) as fh:
        text = fh.read()
    if args.source_format == "cnf":
        cnf = dimacs.read_dimacs(text)
        clauses = [Clause(c) for c in cnf.clauses]
        if not clauses:
            raise CliError("refusing to convert an empty clause set")
        forest = cnf_to_forest(clauses, cnf.var_count)
    else:
        terms, var_count = _read_dnf_terms(text)
        forest = dnf_to_forest(terms, var_count)
    models.dump_forest(forest, args.out)
    print(f"wrote {forest.tree_count} trees over {forest.var_count} variables to {args.out}")
    return EXIT_OK


def cmd_negate(args) -> int:
    forest = _load_model(args.model)
    models.dump_forest(forest.negated(), args.out)
    print(f"wrote negated model to {args.out}")
    return EXIT_OK


def parity_tree(var_count: int) -> DecisionTree:
    """Complete tree computing the parity of all variables."""

    def build(var: int, ones: int) -> dict:
        if var > var_count:
            return {"leaf": ones & 1}
        return {
            "var": var,
            "low": build(var + 1, ones),
            "high": build(var + 1, ones ^ 1),
        }

    return DecisionTree.from_nested(build(1, 0), var_count)


def parity_fixture(var_count: int, copies: int) -> RandomForest:
    """Adversarial constant-1 forest: equal numbers of parity and negated
    parity trees plus one 1-leaf.  Greedy majoritary explanations cannot
    drop a single literal on it, while the empty term is the unique
    sufficient reason."""
    if var_count < 1 or copies < 1:
        raise ValueError("parity width and copy count must be >= 1")
    tree = parity_tree(var_count)
    trees = [tree] * copies + [tree.negated()] * copies
    trees.append(DecisionTree.leaf(1, var_count))
    return RandomForest(trees)


def cmd_fixture_gen(args) -> int:
    forest = parity_fixture(args.parity, args.copies)
    models.dump_forest(forest, args.out)
    print(
        f"wrote parity fixture ({forest.tree_count} trees, "
        f"{forest.var_count} variables) to {args.out}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# stats harness


def _stats_one(
    forest: RandomForest,
    index: int,
    x: tuple[int, ...],
    kind: str,
    settings: ExplainSettings,
) -> tuple[StatsRow, list[tuple[float, int]]]:
    trajectory: list[tuple[float, int]] = []
    try:
        s = ExplainSettings(**{**settings.__dict__, "kind": kind})
        if kind == "majoritary" and s.permutations is None:
            s.permutations = 50
        reason = compute_reason(forest, x, s)
    except OptimizationBudgetError as e:
        reason = e.fallback
    except Exception as e:  # per-instance failures stay in-row
        return StatsRow(index, kind, error=f"{type(e).__name__}: {e}"), trajectory
    if reason is None:
        return StatsRow(index, kind, error="no comprehensible reason"), trajectory
    validate_reason(forest, reason)
    log = reason.extras.get("log")
    if log is not None:
        trajectory = list(log.entries)
    prob = reason.extras.get("probability")
    row = StatsRow(
        instance=index,
        kind=kind,
        size=reason.size,
        elapsed=reason.elapsed,
        optimal=reason.optimal,
        cost=reason.cost,
        probability=str(prob) if prob is not None else None,
        reason=reason.render(forest.feature_names),
    )
    return row, trajectory


def _stats_instance_task(payload):
    forest, index, x, kinds, settings = payload
    return [_stats_one(forest, index, x, kind, settings) for kind in kinds]


def cmd_stats(args) -> int:
    forest = _load_model(args.model)
    instances, _ = models.parse_instances(args.instances, forest.var_count)
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    if not kinds:
        raise CliError("--kinds must name at least one reason kind")
    for k in kinds:
        if k not in KINDS:
            raise CliError(f"unknown kind {k!r} (choose from {', '.join(KINDS)})")
    settings = ExplainSettings(
        kind="direct",
        delta=args.delta,
        weights=args.weights,
        notion=args.notion,
        intelligible=args.intelligible,
        strata=args.strata,
        permutations=args.permutations,
        seed=args.seed,
        timeout=args.timeout,
        linear_weights=args.linear_weights,
    )
    payloads = [
        (forest, i, x, kinds, settings) for i, x in enumerate(instances, 1)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            per_instance = list(pool.map(_stats_instance_task, payloads))
    else:
        per_instance = [_stats_instance_task(p) for p in payloads]
    rows: list[StatsRow] = []
    trajectories: list[tuple[int, str, float, int]] = []
    for results in per_instance:
        for row, trajectory in results:
            rows.append(row)
            trajectories.extend(
                (row.instance, row.kind, round(elapsed, 6), cost)
                for elapsed, cost in trajectory
            )
    models.write_stats(rows, args.out if args.out else sys.stdout)
    if args.trajectories:
        import csv as _csv

        with open(args.trajectories, "w", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(models.TRAJECTORY_COLUMNS)
            writer.writerows(trajectories)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfreasons",
        description="Reasons explaining Boolean decision-tree and random-forest classifications.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="predict a 0/1 class per instance row")
    p.add_argument("model")
    p.add_argument("instances")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("explain", help="compute one reason for one instance")
    p.add_argument("model")
    p.add_argument("instance", help="bit row, e.g. 1,1,0,1 or 1101")
    p.add_argument("--kind", choices=KINDS, default="sufficient")
    p.add_argument("--delta", help="confidence for delta-probable (e.g. 0.75 or 3/4)")
    p.add_argument("--strata", help="salience strata, least salient first: x4;x2,x3;x1")
    p.add_argument("--intelligible", help="comma-separated intelligible features")
    p.add_argument("--weights", help="feature weights: x1:5,x2:1")
    p.add_argument("--notion", choices=("majority", "sufficient"), default="majority",
                   help="implicant notion for comprehensible/inclusion-preferred")
    p.add_argument("--permutations", type=int, default=None,
                   help="try this many random elimination orders (majoritary)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--timeout", type=float, default=None, help="budget in seconds")
    p.add_argument("--order", help="elimination order, e.g. x2,x3,x4,x1")
    p.add_argument("--linear-weights", help="weights of a linear model (lime)")
    p.add_argument("--export-wcnf", metavar="FILE",
                   help="also dump the optimization instance in WCNF form")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("convert", help="build a model file from a CNF or DNF")
    p.add_argument("input")
    p.add_argument("--from", dest="source_format", choices=("cnf", "dnf"), required=True)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("negate", help="write the negated model")
    p.add_argument("model")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_negate)

    p = sub.add_parser("stats", help="batch explanation size/time statistics")
    p.add_argument("model")
    p.add_argument("instances")
    p.add_argument("--kinds", required=True, help="comma-separated reason kinds")
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--out", default=None, help="stats CSV file (default stdout)")
    p.add_argument("--trajectories", default=None,
                   help="side CSV of anytime improvement logs")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--delta", default=None)
    p.add_argument("--weights", default=None)
    p.add_argument("--notion", choices=("majority", "sufficient"), default="majority")
    p.add_argument("--intelligible", default=None)
    p.add_argument("--strata", default=None)
    p.add_argument("--permutations", type=int, default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--linear-weights", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("fixture-gen", help="adversarial parity-forest generator")
    p.add_argument("--parity", type=int, required=True, metavar="N")
    p.add_argument("--copies", type=int, required=True, metavar="K")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_fixture_gen)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, InstanceFormatError, dimacs.DimacsError, ModelFormatError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
