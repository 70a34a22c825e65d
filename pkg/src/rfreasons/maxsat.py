"""Anytime Partial MaxSAT by model-improving linear search.

Soft clauses get relaxation selectors, then the loop alternates between
finding a model and tightening a "total violated weight <= best - 1"
constraint (a sequential weighted counter over the selectors).  Every
intermediate model satisfies all hard clauses, so callers can use each
one as a valid approximate solution; costs reported through the
callback are strictly decreasing.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

from .encodings import VarAllocator, WeightedCnf, weighted_at_most
from .solver import SatSolver, SolveOutcome, SolveStatus


class HardClausesUnsatisfiable(Exception):
    """The mandatory part of the problem has no model."""


class BudgetExhausted(Exception):
    """The time budget ran out before any model was found."""


@dataclass(frozen=True)
class MaxSatResult:
    """Best model found, its exact cost, and whether optimality was proved."""

    model: tuple[bool, ...]
    cost: int
    optimal: bool
    iterations: int = 0
    elapsed: float = 0.0


def violated_weight(
    soft: Sequence[tuple[tuple[int, ...], int]], model: Sequence[bool]
) -> int:
    """Total weight of soft clauses falsified by the model."""
    cost = 0
    for clause, weight in soft:
        if not any(model[abs(l) - 1] == (l > 0) for l in clause):
            cost += weight
    return cost


def maxsat_anytime(
    problem: WeightedCnf,
    budget: float | None = None,
    on_improve: Callable[[tuple[bool, ...], int, float], None] | None = None,
) -> MaxSatResult:
    """Minimize the violated soft weight subject to the hard clauses.

    Raises HardClausesUnsatisfiable when no model exists at all, and
    BudgetExhausted when the budget elapses before the first model.  A
    budget that runs out later yields the best model so far with
    optimal=False.  on_improve(model, cost, elapsed) fires once per
    strictly improving model, the final one included.

    Each run owns a fresh solver session: proving optimality leaves the
    session permanently over-constrained, so sessions cannot be shared
    between runs.
    """
    start = time.monotonic()
    deadline = None if budget is None else start + budget

    def remaining() -> float | None:
        if deadline is None:
            return None
        return deadline - time.monotonic()

    solver = SatSolver(problem.hard)
    alloc = VarAllocator(problem.hard.var_count)
    relaxed: list[tuple[int, int]] = []  # (selector literal, weight)
    for clause, weight in problem.soft:
        sel = alloc.fresh()
        solver.ensure_vars(sel)
        solver.add_clause(tuple(clause) + (sel,))
        relaxed.append((sel, weight))

    n_report = problem.hard.var_count
    best_model: tuple[bool, ...] | None = None
    best_cost = 0
    iterations = 0

    while True:
        left = remaining()
        if left is not None and left <= 0:
            if best_model is None:
                raise BudgetExhausted("no model found within the time budget")
            return MaxSatResult(
                best_model, best_cost, False, iterations, time.monotonic() - start
            )
        outcome: SolveOutcome = solver.solve(budget=left)
        iterations += 1
        if outcome.status is SolveStatus.TIMEOUT:
            if best_model is None:
                raise BudgetExhausted("no model found within the time budget")
            return MaxSatResult(
                best_model, best_cost, False, iterations, time.monotonic() - start
            )
        if outcome.status is SolveStatus.UNSAT:
            if best_model is None:
                raise HardClausesUnsatisfiable("hard clauses are unsatisfiable")
            return MaxSatResult(
                best_model, best_cost, True, iterations, time.monotonic() - start
            )
        model = outcome.model[:n_report]
        cost = violated_weight(problem.soft, model)
        assert best_model is None or cost < best_cost
        best_model, best_cost = model, cost
        if on_improve is not None:
            on_improve(model, cost, time.monotonic() - start)
        if cost == 0:
            return MaxSatResult(
                best_model, 0, True, iterations, time.monotonic() - start
            )
        for clause in weighted_at_most(relaxed, cost - 1, alloc):
            solver.ensure_vars(alloc.top)
            if not solver.add_clause(clause):
                return MaxSatResult(
                    best_model, best_cost, True, iterations, time.monotonic() - start
                )
