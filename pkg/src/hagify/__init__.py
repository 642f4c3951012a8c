"""hagify: rewrite GNN aggregation graphs into hierarchically shared form.

The library turns a per-node aggregation graph into an equivalent HAG
(hierarchically aggregated graph) whose intermediate aggregation nodes
are shared across consumers, checks the rewrite is exact, quantifies the
saved work under a simple cost model, and can execute small GNNs on both
representations to demonstrate identical outputs.
"""
from .cost import (
    CSV_HEADER,
    CostCoefficients,
    CostReport,
    DEFAULT_COEFFICIENTS,
    evaluate_cost,
    report_csv_row,
    report_to_dict,
    savings,
)
from .executor import (
    AggBuffer,
    ForwardResult,
    GnnModel,
    count_runtime_ops,
    features_from_csv,
    features_to_csv,
    forward_gnn_graph,
    forward_hag,
    make_model,
    random_features,
)
from .graphs import (
    EquivalenceResult,
    GraphError,
    Hag,
    InputGraph,
    MODES,
    ParseError,
    SEQUENTIAL_MODE,
    SET_MODE,
    StructuralError,
    ValidationError,
    check_equivalence,
    cover,
    deserialize_hag,
    load_graph,
    make_hag,
    make_input_graph,
    serialize_hag,
    trivial_hag,
)
from .oracle import (
    OptimalResult,
    PrefixBound,
    brute_force_optimal_set,
    prefix_lower_bound,
    verify_approximation,
)
from .search import (
    RedundancyIndex,
    SearchConfig,
    SearchTrace,
    TraceStep,
    default_capacity,
    redundancy,
    search,
    search_naive,
)

__version__ = "0.1.0"

__all__ = [
    "AggBuffer",
    "CSV_HEADER",
    "CostCoefficients",
    "CostReport",
    "DEFAULT_COEFFICIENTS",
    "EquivalenceResult",
    "ForwardResult",
    "GnnModel",
    "GraphError",
    "Hag",
    "InputGraph",
    "MODES",
    "OptimalResult",
    "ParseError",
    "PrefixBound",
    "RedundancyIndex",
    "SEQUENTIAL_MODE",
    "SET_MODE",
    "SearchConfig",
    "SearchTrace",
    "StructuralError",
    "TraceStep",
    "ValidationError",
    "brute_force_optimal_set",
    "check_equivalence",
    "count_runtime_ops",
    "cover",
    "default_capacity",
    "deserialize_hag",
    "evaluate_cost",
    "features_from_csv",
    "features_to_csv",
    "forward_gnn_graph",
    "forward_hag",
    "load_graph",
    "make_hag",
    "make_input_graph",
    "make_model",
    "prefix_lower_bound",
    "random_features",
    "redundancy",
    "report_csv_row",
    "report_to_dict",
    "savings",
    "search",
    "search_naive",
    "serialize_hag",
    "trivial_hag",
    "verify_approximation",
]
