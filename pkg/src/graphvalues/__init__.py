"""Structure-aware cooperative-game attributions for graph nodes."""

from .errors import (
    AllZeroScores,
    DimensionMismatch,
    EmptyCoalition,
    EmptyDataset,
    ExactCapExceeded,
    GraphValuesError,
    IncompleteTable,
    InvalidGraph,
    InvalidTable,
    MemberOverlap,
    NoConvergence,
    NodeOutOfRange,
)
from .explain import ExplanationReport, ego_convert, gstarx_explain, lhop_restrict, top_k
from .graph import Graph, induced_subgraph, is_connected, mask_of, members, neighbor_closure, partition
from .mc import McConfig, compute_hn_mc, sample_subgraph
from .metrics import MetricsBlock, compute_metrics, entropy_sparsity, fidelity, h_fidelity, inv_fidelity, sparsity
from .payoff import (
    CharacteristicFunction,
    ToyMPModel,
    baseline_expectation,
    gstarx_char_fn,
    tabular_game,
    toy_forward,
    unanimity_game,
)
from .values import (
    AssociatedMatrix,
    ValueVector,
    associated_payoff,
    build_associated_matrix,
    compute_hn,
    cshapley_corrected,
    myerson,
    shapley_exact,
    surplus,
)

__version__ = "0.1.0"

__all__ = [
    "AllZeroScores",
    "associated_payoff",
    "AssociatedMatrix",
    "baseline_expectation",
    "build_associated_matrix",
    "CharacteristicFunction",
    "compute_hn",
    "compute_hn_mc",
    "compute_metrics",
    "cshapley_corrected",
    "DimensionMismatch",
    "ego_convert",
    "EmptyCoalition",
    "EmptyDataset",
    "entropy_sparsity",
    "ExactCapExceeded",
    "ExplanationReport",
    "fidelity",
    "Graph",
    "GraphValuesError",
    "gstarx_char_fn",
    "gstarx_explain",
    "h_fidelity",
    "IncompleteTable",
    "induced_subgraph",
    "inv_fidelity",
    "InvalidGraph",
    "InvalidTable",
    "is_connected",
    "lhop_restrict",
    "mask_of",
    "McConfig",
    "MemberOverlap",
    "members",
    "MetricsBlock",
    "myerson",
    "neighbor_closure",
    "NoConvergence",
    "NodeOutOfRange",
    "partition",
    "sample_subgraph",
    "shapley_exact",
    "sparsity",
    "surplus",
    "tabular_game",
    "top_k",
    "toy_forward",
    "ToyMPModel",
    "unanimity_game",
    "ValueVector",
]
