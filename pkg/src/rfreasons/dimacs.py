"""DIMACS CNF / WCNF interchange and an optional external-solver adapter.

WCNF uses the classic header form "p wcnf <vars> <clauses> <top>" where
hard clauses carry the top weight.  The adapter pipes DIMACS over
stdin/stdout to an external binary and parses its "s"/"v" answer lines;
it is never used unless explicitly requested.
"""

from __future__ import annotations

import os
import shlex
import subprocess
from typing import IO, Iterable

from .encodings import WeightedCnf
from .solver import CnfInstance, SolveOutcome, SolveStatus

EXTERNAL_SOLVER_ENV = "RFREASONS_EXTERNAL_SOLVER"


class DimacsError(ValueError):
    """Parse failure, located by input line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _clause_lines(lines: Iterable[str], start_at: int, var_count: int, weighted: bool):
    """Yield (line_no, weight or None, literals) for clause body lines."""
    pending: list[int] = []
    weight = None
    for line_no, raw in lines:
        tokens = raw.split()
        if not tokens or tokens[0] == "c":
            continue
        for tok in tokens:
            try:
                value = int(tok)
            except ValueError:
                raise DimacsError(line_no, f"expected an integer, got {tok!r}") from None
            if weighted and weight is None and not pending:
                if value < 1:
                    raise DimacsError(line_no, f"clause weight must be positive, got {value}")
                weight = value
                continue
            if value == 0:
                yield line_no, weight, pending
                pending = []
                weight = None
            else:
                if abs(value) > var_count:
                    raise DimacsError(
                        line_no, f"literal {value} exceeds declared variable count {var_count}"
                    )
                pending.append(value)
    if pending or weight is not None:
        raise DimacsError(start_at, "unterminated clause at end of input")


def _read_lines(source: str | IO[str]) -> list[str]:
    if hasattr(source, "read"):
        return source.read().splitlines()
    return str(source).splitlines()


def read_dimacs(source: str | IO[str]) -> CnfInstance:
    """Parse a DIMACS CNF document (text or file object)."""
    lines = _read_lines(source)
    header = None
    body_start = 0
    for i, raw in enumerate(lines, 1):
        tokens = raw.split()
        if not tokens or tokens[0] == "c":
            continue
        if tokens[0] == "p":
            if len(tokens) != 4 or tokens[1] != "cnf":
                raise DimacsError(i, f"malformed header {raw.strip()!r}")
            try:
                header = (int(tokens[2]), int(tokens[3]))
            except ValueError:
                raise DimacsError(i, f"malformed header {raw.strip()!r}") from None
            body_start = i
            break
        raise DimacsError(i, "expected 'p cnf <vars> <clauses>' header")
    if header is None:
        raise DimacsError(len(lines) or 1, "missing 'p cnf' header")
    var_count, declared = header
    clauses = [
        tuple(lits)
        for _, _, lits in _clause_lines(
            enumerate(lines[body_start:], body_start + 1), body_start, var_count, False
        )
    ]
    if len(clauses) != declared:
        raise DimacsError(
            body_start, f"header declares {declared} clauses, found {len(clauses)}"
        )
    return CnfInstance(var_count, clauses)


def write_dimacs(cnf: CnfInstance) -> str:
    out = [f"p cnf {cnf.var_count} {len(cnf.clauses)}"]
    out.extend(" ".join(map(str, c)) + " 0" for c in cnf.clauses)
    return "\n".join(out) + "\n"


def read_wcnf(source: str | IO[str]) -> WeightedCnf:
    """Parse a weighted instance; clauses at the declared top weight are hard."""
    lines = _read_lines(source)
    header = None
    body_start = 0
    for i, raw in enumerate(lines, 1):
        tokens = raw.split()
        if not tokens or tokens[0] == "c":
            continue
        if tokens[0] == "p":
            if len(tokens) != 5 or tokens[1] != "wcnf":
                raise DimacsError(i, f"malformed header {raw.strip()!r}")
            try:
                header = (int(tokens[2]), int(tokens[3]), int(tokens[4]))
            except ValueError:
                raise DimacsError(i, f"malformed header {raw.strip()!r}") from None
            body_start = i
            break
        raise DimacsError(i, "expected 'p wcnf <vars> <clauses> <top>' header")
    if header is None:
        raise DimacsError(len(lines) or 1, "missing 'p wcnf' header")
    var_count, declared, top = header
    hard: list[tuple[int, ...]] = []
    soft: list[tuple[tuple[int, ...], int]] = []
    count = 0
    for line_no, weight, lits in _clause_lines(
        enumerate(lines[body_start:], body_start + 1), body_start, var_count, True
    ):
        count += 1
        if weight >= top:
            hard.append(tuple(lits))
        else:
            soft.append((tuple(lits), weight))
    if count != declared:
        raise DimacsError(body_start, f"header declares {declared} clauses, found {count}")
    return WeightedCnf(CnfInstance(var_count, hard), tuple(soft))


def write_wcnf(problem: WeightedCnf) -> str:
    top = sum(w for _, w in problem.soft) + 1
    out = [
        f"p wcnf {problem.hard.var_count} "
        f"{len(problem.hard.clauses) + len(problem.soft)} {top}"
    ]
    out.extend(
        f"{top} " + " ".join(map(str, c)) + " 0" for c in problem.hard.clauses
    )
    out.extend(f"{w} " + " ".join(map(str, c)) + " 0" for c, w in problem.soft)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# external solver adapter


def external_solver_command() -> list[str] | None:
    """Command configured through the environment, or None (the default)."""
    raw = os.environ.get(EXTERNAL_SOLVER_ENV, "").strip()
    return shlex.split(raw) if raw else None


def solve_with_external(
    cnf: CnfInstance,
    command: list[str],
    assumptions: Iterable[int] = (),
    timeout: float | None = None,
) -> SolveOutcome:
    """Run an external DIMACS solver and parse its answer.

    Assumptions are passed as extra unit clauses, which matches the
    intended one-shot use of the adapter.
    """
    assumptions = tuple(assumptions)
    instance = CnfInstance(
        cnf.var_count, list(cnf.clauses) + [(a,) for a in assumptions]
    )
    try:
        proc = subprocess.run(
            command,
            input=write_dimacs(instance),
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired:
        return SolveOutcome(SolveStatus.TIMEOUT)
    status = None
    values: dict[int, bool] = {}
    for line in proc.stdout.splitlines():
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] == "s":
            answer = " ".join(tokens[1:]).upper()
            if "UNSAT" in answer:
                status = SolveStatus.UNSAT
            elif "SAT" in answer:
                status = SolveStatus.SAT
        elif tokens[0] == "v":
            for tok in tokens[1:]:
                lit = int(tok)
                if lit != 0:
                    values[abs(lit)] = lit > 0
    if status is None:
        raise RuntimeError(
            f"external solver produced no status line (exit {proc.returncode})"
        )
    if status is SolveStatus.UNSAT:
        return SolveOutcome(SolveStatus.UNSAT)
    model = tuple(values.get(v, False) for v in range(1, cnf.var_count + 1))
    return SolveOutcome(SolveStatus.SAT, model)
