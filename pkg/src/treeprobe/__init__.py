"""Distance-query games on hidden trees.

Questioners, adversaries, non-adaptive decoders and exact solvers for the
game where one player hides a labeled tree and the other learns it (or a
pair at maximum distance, or its isomorphism class) by asking for the
distance between two vertices.
"""

from .adaptive import find_diameter_pair, identify_spider, reconstruct_tree
from .errors import (
    BudgetExhausted,
    CapExceeded,
    DecodeError,
    DomainError,
    InvariantViolation,
    ProtocolError,
    TreeProbeError,
)
from .nonadaptive import (
    QueryGraphSpec,
    build_min_degree_query_graph,
    build_reconstruction_query_graph,
    complete_missing_distances,
    decode_exact,
    decode_isomorphism,
    find_max_distance_pair_nonadaptive,
    lemi_witness,
)
from .session import AnsweredQueryGraph, QuerySession, check_consistency, session_new
from .solver import Goal, goal_reached, solve_adaptive, solve_nonadaptive
from .trees import (
    LabeledTree,
    TreeShape,
    canonical_code,
    classify_shape,
    diameter,
    enumerate_trees,
    prufer_decode,
    prufer_encode,
    random_tree,
)

__version__ = "0.1.0"

__all__ = [
    "AnsweredQueryGraph",
    "BudgetExhausted",
    "CapExceeded",
    "DecodeError",
    "DomainError",
    "Goal",
    "InvariantViolation",
    "LabeledTree",
    "ProtocolError",
    "QueryGraphSpec",
    "QuerySession",
    "TreeProbeError",
    "TreeShape",
    "build_min_degree_query_graph",
    "build_reconstruction_query_graph",
    "canonical_code",
    "check_consistency",
    "classify_shape",
    "complete_missing_distances",
    "decode_exact",
    "decode_isomorphism",
    "diameter",
    "enumerate_trees",
    "find_diameter_pair",
    "find_max_distance_pair_nonadaptive",
    "goal_reached",
    "identify_spider",
    "lemi_witness",
    "prufer_decode",
    "prufer_encode",
    "random_tree",
    "reconstruct_tree",
    "session_new",
    "solve_adaptive",
    "solve_nonadaptive",
]
