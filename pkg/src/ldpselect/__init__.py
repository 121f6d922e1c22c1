"""Non-interactive locally private hypothesis selection on finite domains."""

from .distributions import (
    DifferenceFunctional,
    DiscreteDistribution,
    HypothesisSet,
    SignedFunctional,
    difference,
    inner,
    l1_distance,
    mixture,
    random_hypothesis_set,
    signed_scheffe_set,
)
from .protocol import (
    LdpTranscript,
    PrivacyParams,
    QueryEstimates,
    SimulatedPopulation,
    channel_privacy_ratio,
    randomized_response,
    required_block_size,
    run_protocol,
)
from .rmde import (
    QueryFamily,
    SelectionConfig,
    SelectionReport,
    plan_sample_size,
    query_family_from_dominating_set,
    rmde_select,
    select_hypothesis,
)
from .scheffe_graph import (
    DominatingSetCertificate,
    PairDigraph,
    ScheffeGraph,
    VertexPair,
    build_scheffe_graph,
    check_metric_triple,
    check_triangle,
    count_low_indegree,
    find_dominating_set,
    scan_triangles,
    verify_domination,
)
from .barriers import (
    FlatteningFamily,
    LowerBoundCertificate,
    StochasticMap,
    build_flattening_family,
    build_lower_bound_graph,
    run_flattening_trials,
    verify_domination_lower_bound,
    verify_flattening_violation,
)

__version__ = "0.1.0"

__all__ = [
    "DifferenceFunctional",
    "DiscreteDistribution",
    "DominatingSetCertificate",
    "FlatteningFamily",
    "HypothesisSet",
    "LdpTranscript",
    "LowerBoundCertificate",
    "PairDigraph",
    "PrivacyParams",
    "QueryEstimates",
    "QueryFamily",
    "ScheffeGraph",
    "SelectionConfig",
    "SelectionReport",
    "SignedFunctional",
    "SimulatedPopulation",
    "StochasticMap",
    "VertexPair",
    "build_flattening_family",
    "build_lower_bound_graph",
    "build_scheffe_graph",
    "channel_privacy_ratio",
    "check_metric_triple",
    "check_triangle",
    "count_low_indegree",
    "difference",
    "find_dominating_set",
    "inner",
    "l1_distance",
    "mixture",
    "plan_sample_size",
    "query_family_from_dominating_set",
    "random_hypothesis_set",
    "randomized_response",
    "required_block_size",
    "rmde_select",
    "run_flattening_trials",
    "run_protocol",
    "scan_triangles",
    "select_hypothesis",
    "signed_scheffe_set",
    "verify_domination",
    "verify_domination_lower_bound",
    "verify_flattening_violation",
]
