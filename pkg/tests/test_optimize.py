import itertools
import math
import random

import pytest

from rfreasons import brute
from rfreasons.core import Clause, DecisionTree, Literal, RandomForest, Term, clause_to_tree
from rfreasons.explain import MajorityOracle, NotAnImplicantError
from rfreasons.optimize import (
    OptimizationBudgetError,
    WeightMap,
    approx_minimal_reason_dt,
    build_hitting_instance,
    majority_wcnf,
    minimal_majoritary_reason,
    minimal_sufficient_reason_dt,
    minimal_weight_majoritary_reason,
)

from conftest import X_NEG, X_POS
from generators import random_forest, random_instance, random_tree


def term_of(*lits: int) -> Term:
    return Term(lits)


class TestMinimalMajoritary:
    def test_positive_golden(self, orchid):
        r = minimal_majoritary_reason(orchid, X_POS)
        assert r.optimal and r.cost == 3 == r.size
        assert r.term in brute.enumerate_majoritary_reasons(orchid, X_POS)

    def test_negative_golden(self, orchid):
        r = minimal_majoritary_reason(orchid, X_NEG)
        assert r.optimal and r.size == 2
        assert r.term in {term_of(-1, -4), term_of(2, -4)}

    def test_constant_tree_forest(self):
        r = minimal_majoritary_reason(RandomForest([DecisionTree.leaf(1, 3)]), (1, 0, 1))
        assert r.term == Term() and r.cost == 0 and r.optimal

    def test_budget_zero_carries_trivial_fallback(self, orchid):
        with pytest.raises(OptimizationBudgetError) as e:
            minimal_majoritary_reason(orchid, X_POS, budget=0)
        fallback = e.value.fallback
        assert fallback.term == Term.of_instance(X_POS)
        assert not fallback.optimal

    def test_matches_bruteforce_minimum(self):
        rng = random.Random(601)
        for _ in range(40):
            n = rng.randint(2, 10)
            forest = random_forest(rng, n, rng.choice([1, 3, 5]), 5)
            x = random_instance(rng, n)
            expected = min(len(t) for t in brute.enumerate_majoritary_reasons(forest, x))
            r = minimal_majoritary_reason(forest, x)
            assert r.optimal and r.size == expected
            # post-hoc oracle validation on the caller side too
            target = forest if forest.evaluate(x) == 1 else forest.negated()
            assert MajorityOracle(target).accepts(r.term)

    def test_anytime_log_is_monotone(self, orchid):
        improvements = []
        r = minimal_majoritary_reason(
            orchid, X_POS, on_improve=lambda t, c, e: improvements.append((t, c))
        )
        costs = [c for _, c in improvements]
        assert costs == sorted(costs, reverse=True)
        assert r.extras["log"].costs() == tuple(costs)
        target_oracle = MajorityOracle(orchid)
        for term, _ in improvements:
            assert target_oracle.accepts(term)


class TestMinimalWeight:
    def test_weighted_golden_positive(self, orchid):
        r = minimal_weight_majoritary_reason(
            orchid, X_POS, WeightMap({1: 5, 2: 1, 3: 1, 4: 1})
        )
        assert r.term == term_of(2, 3, 4)
        assert r.cost == 3 and r.optimal

    def test_weighted_golden_negative(self, orchid):
        r = minimal_weight_majoritary_reason(orchid, X_NEG, WeightMap({2: 10}))
        assert r.term == term_of(-1, -4)
        assert r.cost == 2

    def test_uniform_weights_reduce_to_minimal_size(self, orchid):
        uniform = minimal_weight_majoritary_reason(orchid, X_POS, WeightMap())
        minimal = minimal_majoritary_reason(orchid, X_POS)
        assert uniform.size == minimal.size
        assert uniform.cost == minimal.cost

    def test_matches_bruteforce_weighted_minimum(self):
        rng = random.Random(602)
        for _ in range(30):
            n = rng.randint(2, 9)
            forest = random_forest(rng, n, rng.choice([1, 3, 5]), 4)
            x = random_instance(rng, n)
            weights = WeightMap({v: rng.randint(1, 6) for v in range(1, n + 1)})
            expected = min(
                weights.of_term(t) for t in brute.enumerate_majoritary_reasons(forest, x)
            )
            r = minimal_weight_majoritary_reason(forest, x, weights)
            assert r.optimal and r.cost == expected

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            WeightMap({1: 0})

    def test_total_weight_overflow_rejected(self, orchid):
        with pytest.raises(ValueError):
            minimal_weight_majoritary_reason(orchid, X_POS, WeightMap({1: 2**31}))


class TestMinimalSufficientDt:
    def test_golden_single_tree(self, orchid):
        r = minimal_sufficient_reason_dt(orchid.trees[1], X_POS)
        assert r.term == term_of(2) and r.optimal

    def test_clause_tree(self):
        tree = clause_to_tree(Clause([Literal(1), Literal(2)]), 2)
        r = minimal_sufficient_reason_dt(tree, (1, 1))
        assert r.size == 1 and r.term in {term_of(1), term_of(2)}

    def test_matches_bruteforce_minimum(self):
        rng = random.Random(603)
        for _ in range(60):
            n = rng.randint(2, 10)
            tree = random_tree(rng, n, 5)
            x = random_instance(rng, n)
            expected = min(
                len(t)
                for t in brute.enumerate_sufficient_reasons(RandomForest([tree]), x)
            )
            r = minimal_sufficient_reason_dt(tree, x)
            assert r.optimal and r.size == expected


class TestHittingInstance:
    def test_clause_tree_instance(self):
        tree = clause_to_tree(Clause([Literal(1), Literal(2)]), 2)
        inst = build_hitting_instance(tree, (1, 1))
        assert set(inst.universe) == {Literal(1), Literal(2)}
        assert inst.sets == (frozenset({Literal(1), Literal(2)}),)

    def test_golden_tree_sets(self, orchid):
        inst = build_hitting_instance(orchid.trees[1], X_POS)
        assert {frozenset(l.to_int() for l in s) for s in inst.sets} == {
            frozenset({1, 2}),
            frozenset({2, 4}),
        }

    def test_requires_positive_classification(self, orchid):
        with pytest.raises(NotAnImplicantError):
            build_hitting_instance(orchid.trees[0], (0, 0, 0, 0))

    def test_hitting_characterizes_implication(self):
        rng = random.Random(604)
        for _ in range(25):
            n = rng.randint(2, 10)
            tree = random_tree(rng, n, 5)
            x = random_instance(rng, n)
            if tree.evaluate(x) != 1:
                tree = tree.negated()
            inst = build_hitting_instance(tree, x)
            full = Term.of_instance(x)
            for k in range(0, min(len(full), 6) + 1):
                for subset in itertools.combinations(full.literals, k):
                    term = Term(subset)
                    hits = all(set(subset) & s for s in inst.sets)
                    assert hits == tree.implied_by(term)


class TestGreedyCoverApproximation:
    def test_clause_tree(self):
        tree = clause_to_tree(Clause([Literal(1), Literal(2)]), 2)
        r = approx_minimal_reason_dt(tree, (1, 1))
        assert r.size == 1

    def test_golden_tree_is_sufficient(self, orchid):
        r = approx_minimal_reason_dt(orchid.trees[0], X_POS)
        assert r.term in brute.enumerate_sufficient_reasons(
            RandomForest([orchid.trees[0]]), X_POS
        )
        # the three 0-paths are contradicted by pairwise distinct literals
        assert r.extras["max_adjacency"] == 0

    def test_max_adjacency_counts_shared_sets(self):
        tree = clause_to_tree(Clause([Literal(1), Literal(2)]), 2)
        r = approx_minimal_reason_dt(tree, (1, 1))
        assert r.extras["max_adjacency"] == 1

    def test_ratio_against_exact_minimum(self):
        rng = random.Random(605)
        for _ in range(60):
            n = rng.randint(2, 10)
            tree = random_tree(rng, n, 5)
            x = random_instance(rng, n)
            approx = approx_minimal_reason_dt(tree, x)
            exact = minimal_sufficient_reason_dt(tree, x)
            assert approx.size <= max(1, exact.size) * (math.log(n) + 1)
            target = tree if tree.evaluate(x) == 1 else tree.negated()
            assert brute.is_implicant_bruteforce(target, approx.term)


class TestWcnfConstruction:
    def test_requires_positive_polarity(self, orchid):
        with pytest.raises(NotAnImplicantError):
            majority_wcnf(orchid, X_NEG)

    def test_soft_clauses_negate_instance_literals(self, orchid):
        problem = majority_wcnf(orchid, X_POS)
        assert [c for c, _ in problem.soft] == [(-1,), (-2,), (-3,), (-4,)]
        assert all(w == 1 for _, w in problem.soft)

    def test_selector_forced_off_when_clause_vanishes(self):
        # a tree demanding x1=0 cannot be implied from within t_x with x1=1
        tree = clause_to_tree(Clause([Literal(1, False)]), 2)
        forest = RandomForest([tree, DecisionTree.leaf(1, 2), DecisionTree.leaf(1, 2)])
        x = (1, 1)
        problem = majority_wcnf(forest, x)
        assert (-3,) in problem.hard.clauses  # selector of the first tree
        r = minimal_majoritary_reason(forest, x)
        assert r.term == Term()
