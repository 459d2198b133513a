"""prunesid: training-free token compression for vision-language pipelines.

Reduces a T x D matrix of visual-token embeddings to N << T retained tokens
by (1) grouping tokens along principal directions of the rescaled, centered
token matrix, (2) greedy intra-group non-maximum suppression under an
adaptive redundancy-scaled threshold, and (3) budget apportionment with
backfill so exactly min(N, T) tokens come back. A dataset-level allocator
can additionally spread a fixed average budget across images in proportion
to their information scores.
"""

from ._kernels import ACTIVE as kernel_backend
from ._kernels import HAVE_COMPILED as has_compiled_kernel
from .baselines import (
    InformativenessScore,
    brute_force_best_subset,
    importance_only_select,
    informativeness_objective,
    kmeans_grouping,
    random_grouping,
)
from .budget import (
    BudgetItem,
    BudgetPlan,
    allocate_dynamic_budgets,
    information_histogram,
    information_score,
)
from .errors import (
    FormatError,
    ParameterError,
    PruneSidError,
    ScaleGuardError,
    ValidationError,
)
from .grouping import (
    GroupAssignment,
    default_group_count,
    group_sizes,
    psca_group,
)
from .pruning import (
    CompressionResult,
    PrunedSelection,
    RedundancyStats,
    allocate_quotas,
    compress,
    global_redundancy,
    intra_group_nms,
    mean_pairwise_similarity,
    nms_threshold,
    select_tokens,
)
from .report import build_selection_report, canonical_json, write_selection_report
from .tensor import (
    CenteredMatrix,
    SvdFactors,
    center_tokens,
    exact_svd_oracle,
    pairwise_similarity,
    sigmoid_rescale,
    truncated_svd,
)
from .tokfile import read_token_matrix, write_token_matrix

__version__ = "0.1.0"

__all__ = [
    "BudgetItem",
    "BudgetPlan",
    "CenteredMatrix",
    "CompressionResult",
    "FormatError",
    "GroupAssignment",
    "InformativenessScore",
    "ParameterError",
    "PruneSidError",
    "PrunedSelection",
    "RedundancyStats",
    "ScaleGuardError",
    "SvdFactors",
    "ValidationError",
    "allocate_dynamic_budgets",
    "allocate_quotas",
    "brute_force_best_subset",
    "build_selection_report",
    "canonical_json",
    "center_tokens",
    "compress",
    "default_group_count",
    "exact_svd_oracle",
    "global_redundancy",
    "group_sizes",
    "has_compiled_kernel",
    "importance_only_select",
    "information_histogram",
    "information_score",
    "informativeness_objective",
    "intra_group_nms",
    "kernel_backend",
    "kmeans_grouping",
    "mean_pairwise_similarity",
    "nms_threshold",
    "pairwise_similarity",
    "psca_group",
    "random_grouping",
    "read_token_matrix",
    "select_tokens",
    "sigmoid_rescale",
    "truncated_svd",
    "write_selection_report",
    "write_token_matrix",
]
