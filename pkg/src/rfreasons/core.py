"""Boolean decision trees and majority-vote random forests.

Trees are read-once binary trees over variables x1..xn stored in an
index-based node arena.  All objects in this module are immutable after
construction and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class DimensionError(ValueError):
    """Instance length does not match the model's variable count."""


class InconsistentTermError(ValueError):
    """A variable occurs with both polarities in a term."""


class ModelFormatError(ValueError):
    """A tree or forest violates a structural invariant."""


Instance = Sequence[int]


# ---------------------------------------------------------------------------
# literals, terms, clauses


@dataclass(frozen=True, order=True)
class Literal:
    """A variable x_var or its negation, with 1-based variable index."""

    var: int
    positive: bool = True

    def __post_init__(self):
        if self.var < 1:
            raise ValueError(f"variable index must be >= 1, got {self.var}")

    def complement(self) -> "Literal":
        return Literal(self.var, not self.positive)

    __neg__ = complement

    def to_int(self) -> int:
        """Signed integer form (DIMACS convention)."""
        return self.var if self.positive else -self.var

    @classmethod
    def from_int(cls, lit: int) -> "Literal":
        if lit == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(lit), lit > 0)

    def holds_on(self, x: Instance) -> bool:
        return bool(x[self.var - 1]) == self.positive

    def render(self, feature_names: Sequence[str] | None = None) -> str:
        name = (
            feature_names[self.var - 1]
            if feature_names is not None
            else f"x{self.var}"
        )
        return name if self.positive else f"¬{name}"

    def __str__(self) -> str:
        return self.render()


def _canonical(literals: Iterable[Literal | int]) -> tuple[Literal, ...]:
    out = {}
    for l in literals:
        if isinstance(l, int):
            l = Literal.from_int(l)
        out.setdefault((l.var, l.positive), l)
    return tuple(sorted(out.values(), key=lambda l: (l.var, not l.positive)))


@dataclass(frozen=True)
class Term:
    """A consistent conjunction of literals, canonically sorted by variable.

    Terms double as partial assignments and, when they mention every
    variable, as instances.  Equality is structural.
    """

    literals: tuple[Literal, ...] = ()

    def __init__(self, literals: Iterable[Literal | int] = ()):
        lits = _canonical(literals)
        seen = set()
        for l in lits:
            if l.var in seen:
                raise InconsistentTermError(f"x{l.var} occurs with both polarities")
            seen.add(l.var)
        object.__setattr__(self, "literals", lits)

    @classmethod
    def of_instance(cls, x: Instance) -> "Term":
        """The full term t_x fixing every variable to its value in x."""
        return cls(Literal(i + 1, bool(v)) for i, v in enumerate(x))

    def assignment(self) -> dict[int, bool]:
        return {l.var: l.positive for l in self.literals}

    def variables(self) -> frozenset[int]:
        return frozenset(l.var for l in self.literals)

    def without(self, var: int) -> "Term":
        return Term(l for l in self.literals if l.var != var)

    def restrict_to(self, variables: Iterable[int]) -> "Term":
        keep = set(variables)
        return Term(l for l in self.literals if l.var in keep)

    def covers(self, x: Instance) -> bool:
        return all(l.holds_on(x) for l in self.literals)

    def issubset(self, other: "Term") -> bool:
        return set(self.literals) <= set(other.literals)

    def to_ints(self) -> tuple[int, ...]:
        return tuple(l.to_int() for l in self.literals)

    def render(self, feature_names: Sequence[str] | None = None) -> str:
        if not self.literals:
            return "⊤"
        return " ∧ ".join(l.render(feature_names) for l in self.literals)

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __contains__(self, l: Literal) -> bool:
        return l in self.literals

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class Clause:
    """A disjunction of literals; complementary pairs make it tautological."""

    literals: tuple[Literal, ...] = ()

    def __init__(self, literals: Iterable[Literal | int] = ()):
        object.__setattr__(self, "literals", _canonical(literals))

    def is_tautological(self) -> bool:
        by_var: dict[int, set[bool]] = {}
        for l in self.literals:
            by_var.setdefault(l.var, set()).add(l.positive)
        return any(len(p) == 2 for p in by_var.values())

    def satisfied_by(self, x: Instance) -> bool:
        return any(l.holds_on(x) for l in self.literals)

    def to_ints(self) -> tuple[int, ...]:
        return tuple(l.to_int() for l in self.literals)

    def variables(self) -> frozenset[int]:
        return frozenset(l.var for l in self.literals)

    def render(self, feature_names: Sequence[str] | None = None) -> str:
        if not self.literals:
            return "⊥"
        return " ∨ ".join(l.render(feature_names) for l in self.literals)

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __str__(self) -> str:
        return self.render()


# ---------------------------------------------------------------------------
# decision trees

# Node layout: (var, low, high) with var >= 1 for internal nodes, where
# low/high are arena indices for the value-0/value-1 child; leaves are
# (0, label, label).
_Node = tuple[int, int, int]


@dataclass(frozen=True)
class DecisionTree:
    """A read-once binary decision tree over var_count Boolean variables."""

    var_count: int
    nodes: tuple[_Node, ...]
    root: int

    def __post_init__(self):
        if self.var_count < 0:
            raise ModelFormatError("negative variable count")
        if not 0 <= self.root < len(self.nodes):
            raise ModelFormatError("root index out of range")
        self._validate()

    def _validate(self):
        # Read-once check along every root-to-leaf path, plus index sanity.
        stack = [(self.root, frozenset())]
        while stack:
            i, on_path = stack.pop()
            if not 0 <= i < len(self.nodes):
                raise ModelFormatError(f"child index {i} out of range")
            var, lo, hi = self.nodes[i]
            if var == 0:
                if lo not in (0, 1) or lo != hi:
                    raise ModelFormatError(f"bad leaf {self.nodes[i]!r}")
                continue
            if var > self.var_count:
                raise ModelFormatError(
                    f"node tests x{var} but the tree has {self.var_count} variables"
                )
            if var in on_path:
                raise ModelFormatError(f"x{var} repeats on a root-to-leaf path")
            if lo == i or hi == i:
                raise ModelFormatError("node is its own child")
            nxt = on_path | {var}
            stack.append((lo, nxt))
            stack.append((hi, nxt))

    @classmethod
    def leaf(cls, label: int, var_count: int = 0) -> "DecisionTree":
        """A constant tree."""
        return cls(var_count, ((0, int(bool(label)), int(bool(label))),), 0)

    @classmethod
    def from_nested(cls, node: dict, var_count: int) -> "DecisionTree":
        """Build from nested records {"var": i, "low": ..., "high": ...} with
        {"leaf": 0|1} at the leaves."""
        b = _TreeBuilder(var_count)

        def build(rec) -> int:
            if not isinstance(rec, dict):
                raise ModelFormatError(f"expected a node record, got {rec!r}")
            if "leaf" in rec:
                if rec["leaf"] not in (0, 1):
                    raise ModelFormatError(f"leaf label must be 0 or 1, got {rec['leaf']!r}")
                return b.leaf(rec["leaf"])
            try:
                var = int(rec["var"])
                lo = build(rec["low"])
                hi = build(rec["high"])
            except KeyError as e:
                raise ModelFormatError(f"node record missing {e.args[0]!r}") from None
            return b.node(var, lo, hi)

        return b.finish(build(node))

    def to_nested(self) -> dict:
        """Inverse of from_nested."""

        def emit(i: int) -> dict:
            var, lo, hi = self.nodes[i]
            if var == 0:
                return {"leaf": lo}
            return {"var": var, "low": emit(lo), "high": emit(hi)}

        return emit(self.root)

    @property
    def size(self) -> int:
        """Number of nodes, leaves included."""
        return len(self.nodes)

    def is_leaf(self) -> bool:
        return self.nodes[self.root][0] == 0

    def evaluate(self, x: Instance) -> int:
        if len(x) != self.var_count:
            raise DimensionError(
                f"instance has {len(x)} values, tree expects {self.var_count}"
            )
        var, lo, hi = self.nodes[self.root]
        while var:
            var, lo, hi = self.nodes[hi if x[var - 1] else lo]
        return lo

    def __call__(self, x: Instance) -> int:
        return self.evaluate(x)

    def negated(self) -> "DecisionTree":
        """Same structure with every leaf label flipped."""
        nodes = tuple(
            (0, 1 - lo, 1 - hi) if var == 0 else (var, lo, hi)
            for var, lo, hi in self.nodes
        )
        return DecisionTree(self.var_count, nodes, self.root)

    def paths(self) -> Iterator[tuple[tuple[Literal, ...], int]]:
        """Yield (path literals, leaf label) for every root-to-leaf path."""
        stack = [(self.root, ())]
        while stack:
            i, lits = stack.pop()
            var, lo, hi = self.nodes[i]
            if var == 0:
                yield lits, lo
            else:
                stack.append((hi, lits + (Literal(var, True),)))
                stack.append((lo, lits + (Literal(var, False),)))

    def path_term(self, x: Instance) -> Term:
        """The term of the unique root-to-leaf path compatible with x."""
        if len(x) != self.var_count:
            raise DimensionError(
                f"instance has {len(x)} values, tree expects {self.var_count}"
            )
        lits = []
        var, lo, hi = self.nodes[self.root]
        while var:
            value = bool(x[var - 1])
            lits.append(Literal(var, value))
            var, lo, hi = self.nodes[hi if value else lo]
        return Term(lits)

    def cnf_clauses(self) -> tuple[Clause, ...]:
        """One clause per 0-path (the negation of the path term).

        The conjunction of the clauses is equivalent to the tree.
        Tautological clauses cannot arise from a read-once tree but are
        filtered anyway.
        """
        clauses = []
        for lits, label in self.paths():
            if label == 0:
                c = Clause(l.complement() for l in lits)
                if not c.is_tautological():
                    clauses.append(c)
        return tuple(clauses)

    def dnf_terms(self) -> tuple[Term, ...]:
        """One term per 1-path; their disjunction is equivalent to the tree."""
        return tuple(Term(lits) for lits, label in self.paths() if label == 1)

    def implied_by(self, term: Term) -> bool:
        """Exact implicant test: does every extension of term reach a 1-leaf?

        Single traversal under the partial assignment; a reachable 0-leaf
        refutes implication.  O(size) time.
        """
        assign = term.assignment()
        stack = [self.root]
        while stack:
            var, lo, hi = self.nodes[stack.pop()]
            if var == 0:
                if lo == 0:
                    return False
                continue
            fixed = assign.get(var)
            if fixed is None:
                stack.append(lo)
                stack.append(hi)
            else:
                stack.append(hi if fixed else lo)
        return True

    def count_models(self, term: Term = Term()) -> int:
        """Exact number of assignments extending term that reach a 1-leaf.

        Leaves are weighted by 2^(number of free variables left off the
        path); integer arithmetic throughout.
        """
        assign = term.assignment()
        if assign and max(assign) > self.var_count:
            raise DimensionError("term mentions a variable beyond the tree's range")
        free_total = self.var_count - len(assign)
        total = 0
        stack = [(self.root, 0)]
        while stack:
            i, branched_free = stack.pop()
            var, lo, hi = self.nodes[i]
            if var == 0:
                if lo == 1:
                    total += 1 << (free_total - branched_free)
                continue
            fixed = assign.get(var)
            if fixed is None:
                stack.append((lo, branched_free + 1))
                stack.append((hi, branched_free + 1))
            else:
                stack.append((hi if fixed else lo, branched_free))
        return total


def tree_implies(term: Term, tree: DecisionTree) -> bool:
    return tree.implied_by(term)


class _TreeBuilder:
    """Accumulates nodes bottom-up into an arena."""

    def __init__(self, var_count: int):
        self.var_count = var_count
        self.nodes: list[_Node] = []

    def leaf(self, label: int) -> int:
        self.nodes.append((0, int(bool(label)), int(bool(label))))
        return len(self.nodes) - 1

    def node(self, var: int, lo: int, hi: int) -> int:
        self.nodes.append((var, lo, hi))
        return len(self.nodes) - 1

    def finish(self, root: int) -> DecisionTree:
        return DecisionTree(self.var_count, tuple(self.nodes), root)


def clause_to_tree(clause: Clause, var_count: int) -> DecisionTree:
    """Linear-size tree equivalent to the clause.

    The empty clause yields the constant-0 tree and a tautological clause
    the constant-1 tree.  Literals are consumed in canonical order, each
    adding one decision node whose satisfied branch is a 1-leaf.
    """
    if clause.is_tautological():
        return DecisionTree.leaf(1, var_count)
    b = _TreeBuilder(var_count)
    current = b.leaf(0)
    for lit in reversed(clause.literals):
        one = b.leaf(1)
        if lit.positive:
            current = b.node(lit.var, current, one)
        else:
            current = b.node(lit.var, one, current)
    return b.finish(current)


# ---------------------------------------------------------------------------
# random forests


@dataclass(frozen=True)
class RandomForest:
    """A non-empty ensemble of trees voting by strict majority."""

    trees: tuple[DecisionTree, ...]
    feature_names: tuple[str, ...] | None = None

    def __init__(
        self,
        trees: Iterable[DecisionTree],
        feature_names: Sequence[str] | None = None,
    ):
        trees = tuple(trees)
        if not trees:
            raise ModelFormatError("a forest needs at least one tree")
        n = trees[0].var_count
        if any(t.var_count != n for t in trees):
            raise ModelFormatError("all trees must share the variable count")
        if feature_names is not None:
            feature_names = tuple(feature_names)
            if len(feature_names) != n:
                raise ModelFormatError(
                    f"{len(feature_names)} feature names for {n} variables"
                )
        object.__setattr__(self, "trees", trees)
        object.__setattr__(self, "feature_names", feature_names)

    @property
    def var_count(self) -> int:
        return self.trees[0].var_count

    @property
    def tree_count(self) -> int:
        return len(self.trees)

    @property
    def size(self) -> int:
        return sum(t.size for t in self.trees)

    @property
    def majority(self) -> int:
        """Votes needed to win: strictly more than half the trees."""
        return len(self.trees) // 2 + 1

    def votes(self, x: Instance) -> int:
        return sum(t.evaluate(x) for t in self.trees)

    def evaluate(self, x: Instance) -> int:
        return 1 if self.votes(x) >= self.majority else 0

    def __call__(self, x: Instance) -> int:
        return self.evaluate(x)

    def negated(self) -> "RandomForest":
        """A forest computing the complement function.

        Flipping every leaf complements the majority vote only when the
        tree count is odd; an even ensemble first gets padded with a
        constant tree so that tied votes (which the original maps to 0)
        come out as 1 after negation.
        """
        flipped = [t.negated() for t in self.trees]
        if len(self.trees) % 2 == 0:
            flipped.append(DecisionTree.leaf(1, self.var_count))
        return RandomForest(flipped, self.feature_names)

    def with_odd_tree_count(self) -> "RandomForest":
        """An equivalent forest with an odd number of trees.

        An even ensemble decides 1 only on more than half the votes, so a
        constant-0 tree can be appended without changing the function.
        """
        if len(self.trees) % 2 == 1:
            return self
        return RandomForest(
            self.trees + (DecisionTree.leaf(0, self.var_count),),
            self.feature_names,
        )

    def single(self) -> DecisionTree:
        if len(self.trees) != 1:
            raise ModelFormatError("expected a single-tree forest")
        return self.trees[0]


def cnf_to_forest(
    clauses: Sequence[Clause], var_count: int, feature_names: Sequence[str] | None = None
) -> RandomForest:
    """Forest equivalent to the conjunction of p >= 1 clauses.

    Uses 2p-1 trees: one per clause plus p-1 constant-0 trees, so the
    majority passes exactly when every clause tree accepts.
    """
    p = len(clauses)
    if p < 1:
        raise ValueError("need at least one clause")
    trees = [clause_to_tree(c, var_count) for c in clauses]
    trees.extend(DecisionTree.leaf(0, var_count) for _ in range(p - 1))
    return RandomForest(trees, feature_names)


def dnf_to_forest(
    terms: Sequence[Term], var_count: int, feature_names: Sequence[str] | None = None
) -> RandomForest:
    """Forest equivalent to the disjunction of the terms.

    Dual construction: negate term-wise into clauses, build the clause
    forest, negate the forest.  An empty disjunction is constantly 0.
    """
    if not terms:
        return RandomForest([DecisionTree.leaf(0, var_count)], feature_names)
    negated = [Clause(l.complement() for l in t) for t in terms]
    return cnf_to_forest(negated, var_count, feature_names).negated()
