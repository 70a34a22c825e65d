"""Abductive explanations for Boolean decision trees and random forests.

The package computes "reasons" for individual classifications: direct,
sufficient, majoritary, minimal and minimal-weight, probabilistic,
comprehensible, inclusion-preferred, and linear-model-derived reasons,
on top of an embedded CDCL SAT solver and an anytime Partial MaxSAT
loop.
"""

from .core import (
    Clause,
    DecisionTree,
    DimensionError,
    InconsistentTermError,
    Literal,
    ModelFormatError,
    RandomForest,
    Term,
    clause_to_tree,
    cnf_to_forest,
    dnf_to_forest,
    tree_implies,
)
from .encodings import (
    CardEncoding,
    ImplicantCnf,
    VarAllocator,
    WeightedCnf,
    at_least_k,
    encode_card_majority,
    implicant_test_cnf,
    weighted_at_most,
)
from .explain import (
    DEFAULT_SEED,
    DeltaProbableOracle,
    ExplanationTimeout,
    ForestSatOracle,
    ImplicantOracle,
    LinearModel,
    MajorityOracle,
    NotAnImplicantError,
    Prioritization,
    Reason,
    ReasonKind,
    SingleTreeOracle,
    comprehensible_reason,
    delta_probable_reason_dt,
    direct_reason,
    greedy_reason,
    inclusion_preferred_reason,
    lime_linear_reason,
    majoritary_reason,
    majoritary_reason_multi,
    oracle_for_instance,
    sufficient_reason_dt,
    sufficient_reason_rf,
)
from .maxsat import (
    BudgetExhausted,
    HardClausesUnsatisfiable,
    MaxSatResult,
    maxsat_anytime,
)
from .optimize import (
    AnytimeLog,
    HittingSetInstance,
    OptimizationBudgetError,
    WeightMap,
    approx_minimal_reason_dt,
    build_hitting_instance,
    majority_wcnf,
    minimal_majoritary_reason,
    minimal_sufficient_reason_dt,
    minimal_weight_majoritary_reason,
)
from .solver import CnfInstance, SatSolver, SolveOutcome, SolveStatus

__version__ = "0.1.0"


def is_forest_implicant(forest: RandomForest, term: Term) -> bool:
    """Exact one-shot implicant test for the forest function.

    Builds the refutation encoding and asks the embedded solver; reuse a
    ForestSatOracle instead when testing many terms against one forest.
    """
    return ForestSatOracle(forest).accepts(term)
