"""CNF encodings: cardinality counters, weighted bounds, forest implicant test.

The sequential-counter encodings introduce auxiliary register variables
s[i][j] meaning "at least j of the first i inputs are true" (or, for the
weighted form, "the weighted prefix sum reaches j").
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import RandomForest
from .solver import CnfInstance


class VarAllocator:
    """Hands out fresh variable indices above an initial count."""

    def __init__(self, top: int = 0):
        self.top = top

    def fresh(self) -> int:
        self.top += 1
        return self.top

    def block(self, count: int) -> list[int]:
        return [self.fresh() for _ in range(count)]


@dataclass(frozen=True)
class CardEncoding:
    """An at-least-k constraint over selector literals.

    Register variables are functionally determined by the selectors, so
    models projected onto the selectors are exactly the assignments with
    at least `bound` of them true.
    """

    selectors: tuple[int, ...]
    bound: int
    clauses: tuple[tuple[int, ...], ...]
    aux_range: tuple[int, int]  # [lo, hi) of fresh register variables


def at_least_k(
    selectors: Sequence[int], bound: int, alloc: VarAllocator
) -> CardEncoding:
    """Sequential-counter encoding of sum(selectors) >= bound.

    Registers are constrained in both directions so the auxiliary
    assignment is unique given the selectors.
    """
    selectors = tuple(selectors)
    n = len(selectors)
    aux_lo = alloc.top + 1
    clauses: list[tuple[int, ...]] = []
    if bound <= 0:
        return CardEncoding(selectors, bound, (), (aux_lo, aux_lo))
    if bound > n:
        return CardEncoding(selectors, bound, ((),), (aux_lo, aux_lo))

    # s[i][j] (1-based) is defined for 1 <= j <= min(i, bound); registers
    # outside that range are constants: s[i][0] is true, s[i][j>i] is false.
    s: list[list[int]] = [
        [alloc.fresh() for _ in range(min(i, bound))] for i in range(1, n + 1)
    ]

    y1 = selectors[0]
    clauses.append((-s[0][0], y1))
    clauses.append((-y1, s[0][0]))
    for i in range(2, n + 1):
        yi = selectors[i - 1]
        for j in range(1, min(i, bound) + 1):
            sij = s[i - 1][j - 1]
            prev_j = s[i - 2][j - 1] if j <= i - 1 else None  # s[i-1][j]
            prev_below = s[i - 2][j - 2] if j >= 2 else None  # s[i-1][j-1]
            # count reached already, or reached now through y_i
            if prev_j is not None:
                clauses.append((-prev_j, sij))
            if prev_below is None:
                clauses.append((-yi, sij))
            else:
                clauses.append((-prev_below, -yi, sij))
            # and only then: s[i][j] -> s[i-1][j] or (y_i and s[i-1][j-1])
            base = (-sij,) if prev_j is None else (-sij, prev_j)
            clauses.append(base + (yi,))
            if prev_below is not None:
                clauses.append(base + (prev_below,))
    clauses.append((s[n - 1][bound - 1],))
    return CardEncoding(selectors, bound, tuple(clauses), (aux_lo, alloc.top + 1))


def encode_card_majority(selectors: Sequence[int], alloc: VarAllocator) -> CardEncoding:
    """Constraint that strictly more than half the selectors are true."""
    m = len(selectors)
    if m < 1:
        raise ValueError("need at least one selector")
    return at_least_k(selectors, m // 2 + 1, alloc)


def weighted_at_most(
    items: Sequence[tuple[int, int]], bound: int, alloc: VarAllocator
) -> list[tuple[int, ...]]:
    """Clauses enforcing sum(weight for true literal) <= bound.

    One-directional sequential weighted counter: enough to refute any
    assignment exceeding the bound while every assignment within the
    bound extends to the registers.  Weights must be positive.
    """
    items = [(int(l), int(w)) for l, w in items]
    for _, w in items:
        if w <= 0:
            raise ValueError("weights must be positive")
    clauses: list[tuple[int, ...]] = []
    if bound < 0:
        return [()]
    total = sum(w for _, w in items)
    if total <= bound:
        return []
    if bound == 0:
        return [(-l,) for l, _ in items]

    n = len(items)
    s = [[alloc.fresh() for _ in range(bound)] for _ in range(n)]

    for i in range(n):
        lit, w = items[i]
        if i > 0:  # prefix sums only grow
            for j in range(1, bound + 1):
                clauses.append((-s[i - 1][j - 1], s[i][j - 1]))
        if w > bound:
            clauses.append((-lit,))
            continue
        for j in range(1, min(w, bound) + 1):
            clauses.append((-lit, s[i][j - 1]))
        if i > 0:
            for j in range(1, bound + 1):
                if j + w <= bound:
                    clauses.append((-s[i - 1][j - 1], -lit, s[i][j + w - 1]))
            overflow = bound + 1 - w
            if 1 <= overflow <= bound:
                clauses.append((-s[i - 1][overflow - 1], -lit))
    return clauses


# ---------------------------------------------------------------------------
# forest implicant encoding


@dataclass(frozen=True)
class ImplicantCnf:
    """CNF H with: a term t over the feature variables implies the forest
    iff H together with t's literals is unsatisfiable.

    Selector y_i guards the clausal form of the i-th negated tree, and a
    cardinality constraint demands a strict majority of selectors, so H's
    models are exactly the padded-forest counterexamples.
    """

    cnf: CnfInstance
    feature_count: int
    selectors: tuple[int, ...]


def implicant_test_cnf(forest: RandomForest) -> ImplicantCnf:
    """Build the refutation CNF for exact forest implicant tests.

    An even ensemble is first padded with a constant-0 tree (which keeps
    the function intact) because the strict-majority count of falsified
    trees characterizes the complement only for odd ensembles.
    """
    forest = forest.with_odd_tree_count()
    n = forest.var_count
    m = forest.tree_count
    alloc = VarAllocator(n)
    selectors = tuple(alloc.block(m))
    clauses: list[tuple[int, ...]] = []
    for y, tree in zip(selectors, forest.trees):
        for clause in tree.negated().cnf_clauses():
            clauses.append((-y,) + clause.to_ints())
    card = encode_card_majority(selectors, alloc)
    clauses.extend(card.clauses)
    return ImplicantCnf(CnfInstance(alloc.top, clauses), n, selectors)


@dataclass(frozen=True)
class WeightedCnf:
    """A Partial MaxSAT problem: mandatory clauses plus weighted soft clauses."""

    hard: CnfInstance
    soft: tuple[tuple[tuple[int, ...], int], ...]

    def __post_init__(self):
        for clause, weight in self.soft:
            if weight < 1:
                raise ValueError("soft weights must be >= 1")
            for lit in clause:
                if abs(lit) > self.hard.var_count:
                    raise ValueError("soft literal beyond declared variables")

    @property
    def total_soft_weight(self) -> int:
        return sum(w for _, w in self.soft)
