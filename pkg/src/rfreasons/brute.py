"""Exhaustive-enumeration oracles for testing the fast paths.

Everything here walks all 2^n assignments (or all subsets of an instance
term), independently of the SAT machinery, and is meant for small n.
Truth tables are numpy bool arrays indexed by the assignment read as a
little-endian bit string: bit i-1 of the index is the value of x_i.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

import numpy as np

from .core import DecisionTree, Instance, RandomForest, Term

DEFAULT_VAR_LIMIT = 16


class VarLimitExceeded(ValueError):
    """The model is too wide for exhaustive enumeration."""


def _check_width(n: int, var_limit: int) -> None:
    if n > var_limit:
        raise VarLimitExceeded(f"{n} variables exceed the enumeration limit {var_limit}")


def truth_table_tree(tree: DecisionTree, var_limit: int = DEFAULT_VAR_LIMIT) -> np.ndarray:
    _check_width(tree.var_count, var_limit)
    n = tree.var_count
    idx = np.arange(1 << n, dtype=np.int64)

    def walk(i: int) -> np.ndarray:
        var, lo, hi = tree.nodes[i]
        if var == 0:
            return np.full(1 << n, bool(lo))
        bit = ((idx >> (var - 1)) & 1).astype(bool)
        return np.where(bit, walk(hi), walk(lo))

    return walk(tree.root)


def truth_table_forest(forest: RandomForest, var_limit: int = DEFAULT_VAR_LIMIT) -> np.ndarray:
    _check_width(forest.var_count, var_limit)
    votes = sum(
        truth_table_tree(t, var_limit).astype(np.int32) for t in forest.trees
    )
    return votes >= forest.majority


def cover_mask(term: Term, var_count: int) -> np.ndarray:
    """Boolean mask of the assignments covered by the term."""
    idx = np.arange(1 << var_count, dtype=np.int64)
    mask = np.ones(1 << var_count, dtype=bool)
    for lit in term:
        bit = ((idx >> (lit.var - 1)) & 1).astype(bool)
        mask &= bit if lit.positive else ~bit
    return mask


def is_implicant_bruteforce(
    model: DecisionTree | RandomForest, term: Term, var_limit: int = DEFAULT_VAR_LIMIT
) -> bool:
    """Does every assignment covered by the term satisfy the model?"""
    table = (
        truth_table_tree(model, var_limit)
        if isinstance(model, DecisionTree)
        else truth_table_forest(model, var_limit)
    )
    return bool(table[cover_mask(term, model.var_count)].all())


def conditional_probability_bruteforce(
    tree: DecisionTree, term: Term, var_limit: int = DEFAULT_VAR_LIMIT
) -> Fraction:
    """Exact proportion of the term's extensions that satisfy the tree."""
    table = truth_table_tree(tree, var_limit)
    mask = cover_mask(term, tree.var_count)
    covered = int(np.count_nonzero(mask))
    good = int(np.count_nonzero(table & mask))
    return Fraction(good, covered)


def count_models_bruteforce(
    tree: DecisionTree, term: Term = Term(), var_limit: int = DEFAULT_VAR_LIMIT
) -> int:
    table = truth_table_tree(tree, var_limit)
    return int(np.count_nonzero(table & cover_mask(term, tree.var_count)))


def _minimal_passing_subsets(
    predicate: Callable[[Term], bool], x: Instance
) -> set[Term]:
    """All subsets of t_x passing the predicate whose single-literal
    shrinkings all fail.

    For a predicate closed under adding literals this is exactly the set
    of subset-minimal passing terms.
    """
    full = Term.of_instance(x)
    lits = full.literals
    n = len(lits)
    passing: dict[int, bool] = {}

    def check(bits: int) -> bool:
        cached = passing.get(bits)
        if cached is None:
            cached = predicate(Term(lits[i] for i in range(n) if bits >> i & 1))
            passing[bits] = cached
        return cached

    out = set()
    for bits in range(1 << n):
        if not check(bits):
            continue
        if any(check(bits & ~(1 << i)) for i in range(n) if bits >> i & 1):
            continue
        out.add(Term(lits[i] for i in range(n) if bits >> i & 1))
    return out


def enumerate_sufficient_reasons(
    forest: RandomForest, x: Instance, var_limit: int = DEFAULT_VAR_LIMIT
) -> set[Term]:
    """All sufficient reasons for x, by exhaustive subset enumeration.

    Negative examples are handled through forest negation, as everywhere
    else in the package.
    """
    if forest.evaluate(x) == 0:
        forest = forest.negated()
    table = truth_table_forest(forest, var_limit)
    n = forest.var_count

    def implies(term: Term) -> bool:
        return bool(table[cover_mask(term, n)].all())

    return _minimal_passing_subsets(implies, x)


def enumerate_majoritary_reasons(
    forest: RandomForest, x: Instance, var_limit: int = DEFAULT_VAR_LIMIT
) -> set[Term]:
    """All majoritary reasons for x: subset-minimal terms of t_x implying
    strictly more than half the trees (of the negated forest for negative
    examples)."""
    if forest.evaluate(x) == 0:
        forest = forest.negated()
    tables = [truth_table_tree(t, var_limit) for t in forest.trees]
    n = forest.var_count
    need = forest.majority

    def majority_implicant(term: Term) -> bool:
        mask = cover_mask(term, n)
        votes = 0
        for table in tables:
            if bool(table[mask].all()):
                votes += 1
                if votes >= need:
                    return True
        return False

    return _minimal_passing_subsets(majority_implicant, x)
