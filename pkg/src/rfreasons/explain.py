"""Reasons explaining tree and forest classifications.

The greedy explainers all share one shape: start from the instance term,
try to drop literals in some order, keep a drop whenever the remaining
term still passes an implicant oracle.  Oracles encapsulate what
"implicant" means: of one tree, of a strict majority of trees, of the
forest function itself (via the SAT encoding), or probabilistically.

A negative classification is always explained by negating the model
first; no algorithm here is dual-cased.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    DecisionTree,
    Instance,
    Literal,
    RandomForest,
    Term,
)
from .encodings import implicant_test_cnf
from .solver import SatSolver, SolveStatus

DEFAULT_SEED = 42


class NotAnImplicantError(ValueError):
    """The starting term already fails the oracle."""


class ExplanationTimeout(Exception):
    """A solver budget ran out mid-extraction; carries the partial term."""

    def __init__(self, message: str, partial: Term):
        super().__init__(message)
        self.partial = partial


class ReasonKind(str, Enum):
    DIRECT = "direct"
    SUFFICIENT = "sufficient"
    MAJORITARY = "majoritary"
    MINIMAL_MAJORITARY = "minimal_majoritary"
    MINIMAL_WEIGHT = "minimal_weight"
    DELTA_PROBABLE = "delta_probable"
    COMPREHENSIBLE = "comprehensible"
    INCLUSION_PREFERRED = "inclusion_preferred"
    LIME = "lime"


@dataclass(frozen=True)
class Reason:
    """An explanation term for one classified instance.

    The term always covers the instance it explains.  cost carries the
    objective value for optimizing kinds (size or total feature weight),
    optimal says whether that value was proved minimal, and extras holds
    kind-specific diagnostics (conditional probability, anytime log,
    fallback flags, prediction).
    """

    term: Term
    kind: ReasonKind
    instance: tuple[int, ...]
    cost: int | None = None
    optimal: bool = False
    elapsed: float = 0.0
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "instance", tuple(int(v) for v in self.instance))
        if not self.term.covers(self.instance):
            raise ValueError(
                f"reason {self.term} does not cover its instance {self.instance}"
            )

    @property
    def size(self) -> int:
        return len(self.term)

    def render(self, feature_names: Sequence[str] | None = None) -> str:
        return self.term.render(feature_names)


# ---------------------------------------------------------------------------
# implicant oracles


class ImplicantOracle:
    """Decides whether a term counts as an implicant in some sense.

    monotone means closed under adding literals, which lets the greedy
    loop stop after a single elimination pass.
    """

    monotone = True
    kind = ReasonKind.SUFFICIENT

    def accepts(self, term: Term) -> bool:
        raise NotImplementedError

    @property
    def var_count(self) -> int:
        raise NotImplementedError


class SingleTreeOracle(ImplicantOracle):
    """Exact implicant test for one decision tree (linear-time traversal)."""

    def __init__(self, tree: DecisionTree):
        self.tree = tree

    def accepts(self, term: Term) -> bool:
        return self.tree.implied_by(term)

    @property
    def var_count(self) -> int:
        return self.tree.var_count


class MajorityOracle(ImplicantOracle):
    """Implicant of strictly more than half the trees of a forest."""

    kind = ReasonKind.MAJORITARY

    def __init__(self, forest: RandomForest):
        self.forest = forest

    def accepts(self, term: Term) -> bool:
        needed = self.forest.majority
        votes = 0
        for i, tree in enumerate(self.forest.trees):
            if tree.implied_by(term):
                votes += 1
                if votes >= needed:
                    return True
            if votes + len(self.forest.trees) - 1 - i < needed:
                return False
        return False

    @property
    def var_count(self) -> int:
        return self.forest.var_count


class ForestSatOracle(ImplicantOracle):
    """Exact implicant test for the forest function via one SAT call per
    query; owns its solver session and reuses learnt clauses across
    queries."""

    def __init__(self, forest: RandomForest, budget: float | None = None):
        self.forest = forest
        self.encoding = implicant_test_cnf(forest)
        self.session = SatSolver(self.encoding.cnf)
        self.budget = budget

    def accepts(self, term: Term) -> bool:
        outcome = self.session.solve(
            assumptions=term.to_ints(), budget=self.budget
        )
        if outcome.status is SolveStatus.TIMEOUT:
            raise ExplanationTimeout("implicant query timed out", term)
        return outcome.status is SolveStatus.UNSAT

    @property
    def var_count(self) -> int:
        return self.forest.var_count


class DeltaProbableOracle(ImplicantOracle):
    """Accepts terms whose extensions satisfy the tree with proportion at
    least delta.

    The test is exact: model counts are integers and delta is handled as
    a rational, so no floating point enters the accept decision.  Not
    monotone, so greedy runs to a fixpoint.
    """

    monotone = False
    kind = ReasonKind.DELTA_PROBABLE

    def __init__(self, tree: DecisionTree, delta: float | Fraction | str):
        delta = Fraction(delta)
        if not 0 <= delta <= 1:
            raise ValueError(f"delta must be within [0, 1], got {delta}")
        self.tree = tree
        self.delta = delta

    def accepts(self, term: Term) -> bool:
        count = self.tree.count_models(term)
        extensions = 1 << (self.tree.var_count - len(term))
        return count * self.delta.denominator >= self.delta.numerator * extensions

    def probability(self, term: Term) -> Fraction:
        return Fraction(
            self.tree.count_models(term), 1 << (self.tree.var_count - len(term))
        )

    @property
    def var_count(self) -> int:
        return self.tree.var_count


def oracle_for_instance(
    forest: RandomForest, x: Instance, notion: str = "majority"
) -> ImplicantOracle:
    """Polarity-normalized oracle: negative examples get the negated model.

    notion is "majority", "sufficient" (exact, SAT-backed), or "tree"
    (single-tree forests only).
    """
    normalized = forest if forest.evaluate(x) == 1 else forest.negated()
    if notion == "majority":
        return MajorityOracle(normalized)
    if notion == "sufficient":
        return ForestSatOracle(normalized)
    if notion == "tree":
        return SingleTreeOracle(normalized.single())
    raise ValueError(f"unknown implicant notion {notion!r}")


# ---------------------------------------------------------------------------
# greedy elimination


def default_order(var_count: int) -> tuple[int, ...]:
    """Stable default elimination order: descending feature index."""
    return tuple(range(var_count, 0, -1))


def _eliminate(oracle: ImplicantOracle, term: Term, order: Sequence[int]) -> Term:
    while True:
        changed = False
        for var in order:
            if var not in term.variables():
                continue
            candidate = term.without(var)
            try:
                keep_shrinking = oracle.accepts(candidate)
            except ExplanationTimeout:
                # surface the last accepted term, which is still valid
                raise ExplanationTimeout("extraction timed out", term) from None
            if keep_shrinking:
                term = candidate
                changed = True
        if oracle.monotone or not changed:
            return term


def greedy_reason(
    oracle: ImplicantOracle,
    x: Instance,
    order: Sequence[int] | None = None,
    kind: ReasonKind | None = None,
) -> Reason:
    """Shrink t_x literal by literal while the oracle keeps accepting.

    The result passes the oracle and no single-literal removal does.
    Raises NotAnImplicantError when t_x itself is rejected.
    """
    start = time.monotonic()
    full = Term.of_instance(x)
    if not oracle.accepts(full):
        raise NotAnImplicantError(
            "the instance term fails the oracle; is the polarity normalized?"
        )
    if order is None:
        order = default_order(oracle.var_count)
    term = _eliminate(oracle, full, order)
    return Reason(
        term,
        kind or oracle.kind,
        tuple(x),
        elapsed=time.monotonic() - start,
    )


# ---------------------------------------------------------------------------
# the reason family


def direct_reason(forest: RandomForest, x: Instance) -> Reason:
    """Conjunction of the root-to-leaf path terms of the trees that agree
    with the vote on x; linear in the size of the forest."""
    start = time.monotonic()
    prediction = forest.evaluate(x)
    lits: set[Literal] = set()
    for tree in forest.trees:
        if tree.evaluate(x) == prediction:
            lits.update(tree.path_term(x))
    return Reason(
        Term(lits),
        ReasonKind.DIRECT,
        tuple(x),
        elapsed=time.monotonic() - start,
        extras={"prediction": prediction},
    )


def sufficient_reason_dt(
    tree: DecisionTree, x: Instance, order: Sequence[int] | None = None
) -> Reason:
    """A prime implicant of the tree (or its negation for a negative
    example) covering x; one linear-time implicant test per literal."""
    normalized = tree if tree.evaluate(x) == 1 else tree.negated()
    reason = greedy_reason(
        SingleTreeOracle(normalized), x, order, kind=ReasonKind.SUFFICIENT
    )
    reason.extras["prediction"] = tree.evaluate(x)
    return reason


def sufficient_reason_rf(
    forest: RandomForest,
    x: Instance,
    order: Sequence[int] | None = None,
    seed_term: Term | None = None,
    budget: float | None = None,
) -> Reason:
    """A prime implicant of the forest function covering x.

    Deletion-based extraction: each candidate removal is one SAT call
    with assumptions against the implicant encoding.  seed_term, when
    given, must itself be an implicant covering x (for instance a
    majoritary reason); the result is then a subset of the seed.
    """
    start = time.monotonic()
    prediction = forest.evaluate(x)
    oracle = oracle_for_instance(forest, x, "sufficient")
    oracle.budget = budget
    full = seed_term if seed_term is not None else Term.of_instance(x)
    if not full.covers(x):
        raise ValueError("seed term must cover the instance")
    if not oracle.accepts(full):
        raise NotAnImplicantError("seed term is not an implicant of the forest")
    if order is None:
        order = default_order(oracle.var_count)
    term = _eliminate(oracle, full, order)
    return Reason(
        term,
        ReasonKind.SUFFICIENT,
        tuple(x),
        elapsed=time.monotonic() - start,
        extras={"prediction": prediction},
    )


def majoritary_reason(
    forest: RandomForest, x: Instance, order: Sequence[int] | None = None
) -> Reason:
    """Greedy majoritary reason under one elimination order; worst case
    one tree traversal per (literal, tree) pair."""
    prediction = forest.evaluate(x)
    reason = greedy_reason(oracle_for_instance(forest, x, "majority"), x, order)
    reason.extras["prediction"] = prediction
    return reason


def majoritary_reason_multi(
    forest: RandomForest,
    x: Instance,
    permutations: int = 50,
    seed: int = DEFAULT_SEED,
) -> Reason:
    """Smallest majoritary reason over uniformly random elimination
    orders, deterministic for a fixed seed."""
    start = time.monotonic()
    if permutations < 1:
        raise ValueError("need at least one permutation")
    rng = random.Random(seed)
    oracle = oracle_for_instance(forest, x, "majority")
    prediction = forest.evaluate(x)
    base = list(range(1, forest.var_count + 1))
    best: Reason | None = None
    for _ in range(permutations):
        rng.shuffle(base)
        candidate = greedy_reason(oracle, x, tuple(base))
        if best is None or candidate.size < best.size:
            best = candidate
    assert best is not None
    return Reason(
        best.term,
        ReasonKind.MAJORITARY,
        tuple(x),
        elapsed=time.monotonic() - start,
        extras={"prediction": prediction, "permutations": permutations, "seed": seed},
    )


def delta_probable_reason_dt(
    tree: DecisionTree,
    x: Instance,
    delta: float | Fraction | str,
    order: Sequence[int] | None = None,
) -> Reason:
    """Greedy delta-probable reason for a single tree.

    The oracle compares exact model counts against delta as a rational;
    elimination repeats until no single literal can be dropped, since the
    probabilistic test is not monotone.
    """
    normalized = tree if tree.evaluate(x) == 1 else tree.negated()
    oracle = DeltaProbableOracle(normalized, delta)
    reason = greedy_reason(oracle, x, order)
    reason.extras["prediction"] = tree.evaluate(x)
    reason.extras["delta"] = oracle.delta
    reason.extras["probability"] = oracle.probability(reason.term)
    return reason


def comprehensible_reason(
    oracle: ImplicantOracle,
    x: Instance,
    intelligible: Iterable[int],
    order: Sequence[int] | None = None,
) -> Reason | None:
    """A reason restricted to literals over the intelligible features, or
    None when no such reason exists for this oracle.

    Restricting t_x to the intelligible features gives the inclusion-
    largest candidate, so for monotone oracles the rejection test is
    exact.
    """
    start = time.monotonic()
    keep = set(intelligible)
    if not keep <= set(range(1, oracle.var_count + 1)):
        raise ValueError("intelligible features out of range")
    restricted = Term.of_instance(x).restrict_to(keep)
    if not oracle.accepts(restricted):
        return None
    if order is None:
        order = tuple(v for v in default_order(oracle.var_count) if v in keep)
    term = _eliminate(oracle, restricted, order)
    return Reason(
        term,
        ReasonKind.COMPREHENSIBLE,
        tuple(x),
        elapsed=time.monotonic() - start,
        extras={"intelligible": tuple(sorted(keep))},
    )


@dataclass(frozen=True)
class Prioritization:
    """Ordered partition of features into salience strata, least salient
    first; features left out form an implicit final stratum."""

    strata: tuple[frozenset[int], ...]

    def __init__(self, strata: Iterable[Iterable[int]]):
        frozen = tuple(frozenset(s) for s in strata)
        if any(not s for s in frozen):
            raise ValueError("strata must be non-empty")
        seen: set[int] = set()
        for s in frozen:
            if s & seen:
                raise ValueError("strata must be pairwise disjoint")
            seen |= s
        object.__setattr__(self, "strata", frozen)

    def elimination_order(self, var_count: int) -> tuple[int, ...]:
        """Strata in declared order, ascending index inside each; unlisted
        features last."""
        order: list[int] = []
        for s in self.strata:
            order.extend(sorted(s))
        listed = set(order)
        order.extend(v for v in range(1, var_count + 1) if v not in listed)
        return tuple(order)

    def full_strata(self, var_count: int) -> tuple[frozenset[int], ...]:
        listed = set().union(*self.strata) if self.strata else set()
        rest = frozenset(range(1, var_count + 1)) - listed
        return self.strata + ((rest,) if rest else ())

    def prefers(self, t: Term, other: Term, var_count: int) -> bool:
        """Strict preference: t beats other on the first stratum where
        their projections differ, by strict inclusion."""
        for stratum in self.full_strata(var_count):
            a = frozenset(l for l in t if l.var in stratum)
            b = frozenset(l for l in other if l.var in stratum)
            if a == b:
                continue
            return a < b
        return False


def inclusion_preferred_reason(
    oracle: ImplicantOracle, x: Instance, prioritization: Prioritization
) -> Reason:
    """Greedy reason that tries hardest to drop the least salient
    features: elimination follows the strata in order, ascending feature
    index inside a stratum."""
    order = prioritization.elimination_order(oracle.var_count)
    reason = greedy_reason(oracle, x, order, kind=ReasonKind.INCLUSION_PREFERRED)
    reason.extras["strata"] = tuple(tuple(sorted(s)) for s in prioritization.strata)
    return reason


# ---------------------------------------------------------------------------
# linear threshold models


@dataclass(frozen=True)
class LinearModel:
    """A linear threshold classifier: positive iff weights . x > 0."""

    weights: tuple[Fraction, ...]

    def __init__(self, weights: Iterable[float | Fraction | str]):
        object.__setattr__(self, "weights", tuple(Fraction(w) for w in weights))

    @property
    def var_count(self) -> int:
        return len(self.weights)

    def evaluate(self, x: Instance) -> int:
        score = sum(w for w, v in zip(self.weights, x) if v)
        return 1 if score > 0 else 0


def lime_linear_reason(model: LinearModel, x: Instance) -> Reason:
    """Minimal sufficient reason of a linear threshold model covering x.

    Positive case: take positive weights in decreasing order until their
    sum beats the total negative mass; the picked variables form the
    reason.  Negative case dually with the negative weights.  Ties break
    on ascending feature index.  When the cumulative procedure cannot
    reach the bound, or picks a variable whose value in x disagrees, the
    full instance term is returned with a fallback flag in extras.
    """
    start = time.monotonic()
    if len(x) != model.var_count:
        raise ValueError("instance length does not match the weight vector")
    prediction = model.evaluate(x)
    weights = model.weights
    if prediction == 1:
        pool = sorted(
            ((w, i + 1) for i, w in enumerate(weights) if w > 0),
            key=lambda p: (-p[0], p[1]),
        )
        bound = -sum(w for w in weights if w < 0)
        exceed = lambda total: total > bound
    else:
        pool = sorted(
            ((w, i + 1) for i, w in enumerate(weights) if w < 0),
            key=lambda p: (p[0], p[1]),
        )
        bound = -sum(w for w in weights if w > 0)
        exceed = lambda total: total <= bound

    picked: list[int] = []
    total = Fraction(0)
    reached = exceed(total)
    for w, var in pool:
        if reached:
            break
        picked.append(var)
        total += w
        if exceed(total):
            reached = True

    fallback = None
    if not reached:
        fallback = "bound_unreachable"
    elif any(x[v - 1] != 1 for v in picked):
        fallback = "selection_not_covering"
    if fallback is not None:
        term = Term.of_instance(x)
    else:
        term = Term(Literal(v, True) for v in picked)
    extras = {"prediction": prediction}
    if fallback:
        extras["fallback"] = fallback
    return Reason(
        term,
        ReasonKind.LIME,
        tuple(x),
        optimal=fallback is None,
        elapsed=time.monotonic() - start,
        extras=extras,
    )
