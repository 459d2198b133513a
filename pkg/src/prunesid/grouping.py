"""Partition tokens into semantically coherent groups.

Tokens are grouped by the principal direction of the centered, rescaled
token matrix on which their loading magnitude is largest; that magnitude is
also the token's selection score for pruning.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .tensor import as_token_matrix, center_tokens, sigmoid_rescale, truncated_svd

_DEGENERATE_TOL = 1e-12

GROUP_DIVISOR = 4  # default group count is budget // 4


@dataclass
class GroupAssignment:
    """Partition of tokens into K groups plus per-token selection scores.

    ``loadings`` is the T-by-K matrix of right singular vectors for the
    principal-direction grouping; baseline grouping strategies leave it None.
    """

    group_of: np.ndarray  # length T, values in [0, K)
    scores: np.ndarray  # length T, nonnegative
    K: int
    loadings: np.ndarray | None = None

    def __post_init__(self):
        self.group_of = np.asarray(self.group_of, dtype=np.intp)
        self.scores = np.asarray(self.scores, dtype=np.float64)

    @property
    def T(self) -> int:
        return self.group_of.shape[0]

    def groups(self) -> list[np.ndarray]:
        """Token indices per group, ascending within each group."""
        return [np.flatnonzero(self.group_of == k) for k in range(self.K)]


def default_group_count(N: int, shape: tuple[int, int] | None = None) -> int:
    """Default group count: budget // 4, optionally clamped to the matrix.

    With a (T, D) shape supplied the result is clamped into
    [1, min(T - 1, D)] because centering removes one token-direction degree
    of freedom.
    """
    if N < GROUP_DIVISOR:
        raise ParameterError(
            f"budget N={N} is too small for the default group rule (needs N >= "
            f"{GROUP_DIVISOR}); pass an explicit group count instead"
        )
    K = N // GROUP_DIVISOR
    if shape is not None:
        T, D = shape
        hi = max(1, min(T - 1, D))
        K = min(K, hi)
    return max(1, K)


def psca_group(X, K: int, seed: int = 0, svd_iters: int | None = None) -> GroupAssignment:
    """Group tokens by their dominant principal direction.

    Pipeline: sigmoid rescale -> center across tokens -> truncated SVD of the
    transposed centered matrix -> assign each token to the column of V where
    its absolute loading is largest (ties go to the smallest column index).
    The score of token i is that largest absolute loading.

    A centered matrix that is numerically zero (all tokens identical) skips
    the SVD: every token lands in group 0 with score 0.
    """
    arr = as_token_matrix(X)
    T, D = arr.shape
    if not 1 <= K <= min(T, D):
        raise ParameterError(f"K={K} out of range [1, {min(T, D)}] for shape {arr.shape}")

    centered = center_tokens(sigmoid_rescale(arr))
    if np.max(np.abs(centered.data)) < _DEGENERATE_TOL:
        return GroupAssignment(
            group_of=np.zeros(T, dtype=np.intp),
            scores=np.zeros(T),
            K=K,
            loadings=np.zeros((T, K)),
        )

    kwargs = {} if svd_iters is None else {"iters": svd_iters}
    factors = truncated_svd(centered.data.T, K, seed=seed, **kwargs)
    loadings = factors.V  # T x K
    magnitude = np.abs(loadings)
    group_of = magnitude.argmax(axis=1)  # argmax takes the smallest index on ties
    scores = magnitude[np.arange(T), group_of]
    return GroupAssignment(group_of=group_of, scores=scores, K=K, loadings=loadings)


def clamp_group_count(K: int, shape: tuple[int, int]) -> int:
    """Pipeline-mode clamp of an explicit K into [1, min(T, D)], with a warning."""
    T, D = shape
    hi = min(T, D)
    if K < 1:
        raise ParameterError(f"group count must be >= 1, got {K}")
    if K > hi:
        warnings.warn(f"group count {K} clamped to {hi} for a {T}x{D} matrix")
        return hi
    return K


def group_sizes(assignment: GroupAssignment) -> np.ndarray:
    """Token count per group; sums to T."""
    return np.bincount(assignment.group_of, minlength=assignment.K)
