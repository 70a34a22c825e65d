"""Minimum-size and minimum-weight reasons.

The forest-level optimizers reduce to Partial MaxSAT: selector-guarded
restricted tree clauses plus a majority cardinality constraint form the
hard part, and one soft clause per instance literal asks to drop it.
Intersecting the instance term with any model of the hard part yields a
term implying a strict majority of trees, so even non-optimal
intermediate models give valid abductive explanations; the optimum gives
a minimum-size (or minimum-weight) majoritary reason.

For single trees, a greedy covering over the contradicted 0-paths gives
a fast approximation of the minimum-size reason.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .core import DecisionTree, Instance, Literal, RandomForest, Term
from .encodings import VarAllocator, WeightedCnf, encode_card_majority
from .explain import (
    MajorityOracle,
    NotAnImplicantError,
    Reason,
    ReasonKind,
    SingleTreeOracle,
    default_order,
    _eliminate,
)
from .maxsat import BudgetExhausted, MaxSatResult, maxsat_anytime
from .solver import CnfInstance

MAX_TOTAL_WEIGHT = 2**31 - 1


class OptimizationBudgetError(Exception):
    """Budget ran out before any model; carries the trivial fallback."""

    def __init__(self, message: str, fallback: Reason):
        super().__init__(message)
        self.fallback = fallback


@dataclass(frozen=True)
class AnytimeLog:
    """Improvement trajectory: (seconds since start, cost) per model."""

    entries: tuple[tuple[float, int], ...]

    def costs(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.entries)


@dataclass(frozen=True)
class WeightMap:
    """Positive integer disutility per feature; missing features weigh 1."""

    weights: Mapping[int, int]

    def __init__(self, weights: Mapping[int, int] | None = None):
        weights = dict(weights or {})
        for var, w in weights.items():
            if int(w) < 1:
                raise ValueError(f"weight of x{var} must be >= 1")
        object.__setattr__(self, "weights", weights)

    def of(self, var: int) -> int:
        return int(self.weights.get(var, 1))

    def of_term(self, term: Term) -> int:
        return sum(self.of(l.var) for l in term)


def majority_wcnf(
    forest: RandomForest, x: Instance, weights: WeightMap | None = None
) -> WeightedCnf:
    """The Partial MaxSAT instance whose optima are the minimum-weight
    majoritary reasons for x.

    Callers must pass a polarity-normalized forest (one that classifies x
    positively).  Soft clauses negate the instance literals; hard clauses
    say "selector i implies every clause of tree i restricted to the
    instance literals" plus the strict-majority count over selectors.  A
    tree with a clause that loses all its literals under the restriction
    cannot be implied from within t_x, so its selector is forced off.
    """
    if forest.evaluate(x) != 1:
        raise NotAnImplicantError("forest must classify the instance positively")
    weights = weights or WeightMap()
    n = forest.var_count
    instance_lits = set(Term.of_instance(x).to_ints())
    total = sum(weights.of(v) for v in range(1, n + 1))
    if total > MAX_TOTAL_WEIGHT:
        raise ValueError("total feature weight overflows the optimizer bound")

    alloc = VarAllocator(n)
    selectors = tuple(alloc.fresh() for _ in forest.trees)
    hard: list[tuple[int, ...]] = []
    for y, tree in zip(selectors, forest.trees):
        for clause in tree.cnf_clauses():
            restricted = tuple(l for l in clause.to_ints() if l in instance_lits)
            hard.append((-y,) + restricted)  # empty restriction forces -y
    card = encode_card_majority(selectors, alloc)
    hard.extend(card.clauses)
    soft = tuple(
        ((-lit,), weights.of(abs(lit))) for lit in sorted(instance_lits, key=abs)
    )
    return WeightedCnf(CnfInstance(alloc.top, hard), soft)


def _intersect_with_model(x: Instance, model: Sequence[bool]) -> Term:
    return Term(
        l for l in Term.of_instance(x) if model[l.var - 1] == l.positive
    )


def _optimize(
    forest: RandomForest,
    x: Instance,
    weights: WeightMap | None,
    kind: ReasonKind,
    budget: float | None,
    on_improve: Callable[[Term, int, float], None] | None,
) -> Reason:
    start = time.monotonic()
    prediction = forest.evaluate(x)
    normalized = forest if prediction == 1 else forest.negated()
    problem = majority_wcnf(normalized, x, weights)
    oracle = MajorityOracle(normalized)
    log: list[tuple[float, int]] = []

    def improved(model, cost, elapsed):
        term = _intersect_with_model(x, model)
        assert oracle.accepts(term), "optimizer produced a non-implicant"
        log.append((elapsed, cost))
        if on_improve is not None:
            on_improve(term, cost, elapsed)

    try:
        result: MaxSatResult = maxsat_anytime(problem, budget=budget, on_improve=improved)
    except BudgetExhausted as e:
        trivial = Reason(
            Term.of_instance(x),
            kind,
            tuple(x),
            cost=(weights or WeightMap()).of_term(Term.of_instance(x)),
            optimal=False,
            elapsed=time.monotonic() - start,
            extras={"prediction": prediction, "fallback": "budget"},
        )
        raise OptimizationBudgetError(str(e), trivial) from None

    term = _intersect_with_model(x, result.model)
    if not oracle.accepts(term):
        raise AssertionError("optimizer produced a non-implicant")
    return Reason(
        term,
        kind,
        tuple(x),
        cost=result.cost,
        optimal=result.optimal,
        elapsed=time.monotonic() - start,
        extras={
            "prediction": prediction,
            "log": AnytimeLog(tuple(log)),
        },
    )


def minimal_majoritary_reason(
    forest: RandomForest,
    x: Instance,
    budget: float | None = None,
    on_improve: Callable[[Term, int, float], None] | None = None,
) -> Reason:
    """A minimum-size majoritary reason when solved to optimality within
    the budget, otherwise the best intermediate explanation found.

    cost is the reason size.  Raises OptimizationBudgetError (carrying
    the trivial instance-term reason) when the budget dies before any
    model."""
    return _optimize(forest, x, None, ReasonKind.MINIMAL_MAJORITARY, budget, on_improve)


def minimal_weight_majoritary_reason(
    forest: RandomForest,
    x: Instance,
    weights: WeightMap,
    budget: float | None = None,
    on_improve: Callable[[Term, int, float], None] | None = None,
) -> Reason:
    """Majoritary reason minimizing the summed feature weights; uniform
    weights make this coincide with minimal_majoritary_reason."""
    return _optimize(
        forest, x, weights, ReasonKind.MINIMAL_WEIGHT, budget, on_improve
    )


def minimal_sufficient_reason_dt(
    tree: DecisionTree, x: Instance, budget: float | None = None
) -> Reason:
    """A minimum-size prime implicant of the tree covering x, solved as
    the single-tree case of the majority optimization."""
    prediction = tree.evaluate(x)
    normalized = tree if prediction == 1 else tree.negated()
    reason = _optimize(
        RandomForest([normalized]), x, None, ReasonKind.SUFFICIENT, budget, None
    )
    reason.extras["prediction"] = prediction
    return reason


# ---------------------------------------------------------------------------
# greedy covering for single trees


@dataclass(frozen=True)
class HittingSetInstance:
    """Covering view of the implicant test inside t_x: a term implies the
    tree exactly when it hits, for every 0-path, the set of instance
    literals contradicting that path."""

    universe: tuple[Literal, ...]
    sets: tuple[frozenset[Literal], ...]

    def max_adjacency(self) -> int:
        """Largest number of elements sharing a set with some element."""
        best = 0
        for l in self.universe:
            adj = set()
            for s in self.sets:
                if l in s:
                    adj |= s
            adj.discard(l)
            best = max(best, len(adj))
        return best


def build_hitting_instance(tree: DecisionTree, x: Instance) -> HittingSetInstance:
    if tree.evaluate(x) != 1:
        raise NotAnImplicantError("tree must classify the instance positively")
    full = Term.of_instance(x)
    members = set(full)
    sets = []
    for lits, label in tree.paths():
        if label == 0:
            contradicting = frozenset(
                l.complement() for l in lits if l.complement() in members
            )
            sets.append(contradicting)
    return HittingSetInstance(full.literals, tuple(sets))


def approx_minimal_reason_dt(tree: DecisionTree, x: Instance) -> Reason:
    """Greedy approximation of the minimum-size reason for a tree.

    Repeatedly picks an instance literal hitting the most still-uncovered
    0-path sets (ties to the lowest feature index), then prime-reduces
    the cover so the output is a genuine sufficient reason.
    """
    start = time.monotonic()
    prediction = tree.evaluate(x)
    normalized = tree if prediction == 1 else tree.negated()
    instance = build_hitting_instance(normalized, x)
    remaining = [s for s in instance.sets]
    picked: set[Literal] = set()
    while remaining:
        degree: dict[Literal, int] = {}
        for s in remaining:
            for l in s:
                degree[l] = degree.get(l, 0) + 1
        best = max(degree.items(), key=lambda kv: (kv[1], -kv[0].var))[0]
        picked.add(best)
        remaining = [s for s in remaining if best not in s]
    term = _eliminate(
        SingleTreeOracle(normalized), Term(picked), default_order(tree.var_count)
    )
    return Reason(
        term,
        ReasonKind.SUFFICIENT,
        tuple(x),
        optimal=False,
        elapsed=time.monotonic() - start,
        extras={
            "prediction": prediction,
            "method": "greedy_cover",
            "max_adjacency": instance.max_adjacency(),
        },
    )
