"""Ablation baselines and the informativeness objective with its exhaustive
oracle.

The baselines mirror the main pipeline's grouping and ordering stages with
one piece swapped out (random or k-means grouping; importance-only ordering
with or without suppression), so mechanism-level comparisons stay apples to
apples. The brute-force oracle maximizes the same gain-minus-redundancy
objective by enumeration on tiny instances.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ScaleGuardError, ValidationError
from .grouping import GroupAssignment, clamp_group_count, default_group_count, psca_group
from .pruning import (
    DEFAULT_ALPHA,
    PIPELINE_SVD_ITERS,
    PrunedSelection,
    _normalize_with_count,
    _mean_similarity_from_normalized,
    _order_by_score,
    grouped_nms_selection,
    nms_threshold,
    select_tokens,
)
from .tensor import as_token_matrix, pairwise_similarity

_BRUTE_MAX_TOKENS = 16
_BRUTE_MAX_SUBSETS = 20000


@dataclass
class InformativenessScore:
    """Gain minus redundancy penalty for a retained subset."""

    gain: float  # sum of selection scores over the subset
    penalty: float  # sum of positive pairwise similarities
    J: float  # gain - penalty


def random_grouping(T: int, K: int, seed: int = 0, X=None) -> GroupAssignment:
    """Shuffle tokens and split them into K contiguous chunks of size +-1.

    Scores are row L2 norms when the token matrix is supplied (the
    importance measure the no-grouping ablation sorts by), zero otherwise.
    """
    if K > T:
        raise ParameterError(f"K={K} exceeds token count T={T}")
    if K < 1 or T < 1:
        raise ParameterError(f"need K >= 1 and T >= 1, got K={K}, T={T}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(T)
    group_of = np.empty(T, dtype=np.intp)
    base, extra = divmod(T, K)
    start = 0
    for k in range(K):
        size = base + (1 if k < extra else 0)
        group_of[perm[start : start + size]] = k
        start += size
    if X is not None:
        scores = np.linalg.norm(as_token_matrix(X), axis=1)
    else:
        scores = np.zeros(T)
    return GroupAssignment(group_of=group_of, scores=scores, K=K)


def lloyd_iterations(
    X, K: int, seed: int = 0, iters: int = 50
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Seeded k-means++ init plus Lloyd updates.

    Returns (labels, centers, per-iteration within-cluster sum of squares).
    An empty cluster is repaired by reseeding it to the point farthest from
    its current center.
    """
    arr = as_token_matrix(X)
    T = arr.shape[0]
    if K > T:
        raise ParameterError(f"K={K} exceeds token count T={T}")
    rng = np.random.default_rng(seed)

    # k-means++ style init
    centers = np.empty((K, arr.shape[1]))
    centers[0] = arr[rng.integers(T)]
    closest = ((arr - centers[0]) ** 2).sum(axis=1)
    for k in range(1, K):
        weights = closest.sum()
        if weights == 0:
            centers[k] = arr[rng.integers(T)]
        else:
            centers[k] = arr[rng.choice(T, p=closest / weights)]
        closest = np.minimum(closest, ((arr - centers[k]) ** 2).sum(axis=1))

    labels = np.zeros(T, dtype=np.intp)
    history: list[float] = []
    for _ in range(max(1, iters)):
        d2 = ((arr[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        for k in range(K):
            members = new_labels == k
            if members.any():
                centers[k] = arr[members].mean(axis=0)
            else:
                worst = int(np.argmax(d2[np.arange(T), new_labels]))
                centers[k] = arr[worst]
                new_labels[worst] = k
        wcss = float(((arr - centers[new_labels]) ** 2).sum())
        history.append(wcss)
        if (new_labels == labels).all() and len(history) > 1:
            labels = new_labels
            break
        labels = new_labels
    return labels, centers, history


def kmeans_grouping(X, K: int, seed: int = 0, iters: int = 50) -> GroupAssignment:
    """Lloyd clustering on raw token features.

    Scores are negated distances to the own centroid, shifted so the
    minimum is zero (closest-to-center tokens rank highest).
    """
    arr = as_token_matrix(X)
    labels, centers, _ = lloyd_iterations(arr, K, seed=seed, iters=iters)
    dist = np.linalg.norm(arr - centers[labels], axis=1)
    scores = dist.max() - dist
    return GroupAssignment(group_of=labels, scores=scores, K=K)


def importance_only_select(
    X,
    N: int,
    order: str,
    *,
    K: int | None = None,
    alpha: float = DEFAULT_ALPHA,
    seed: int = 0,
    scores=None,
    tau: float | None = None,
) -> PrunedSelection:
    """Importance-only ablation variants of the selection stage.

    ``order="ascend"`` keeps the top-N tokens by selection score with no
    suppression at all (importance preserved, redundancy ignored).
    ``order="descend"`` prefers the *least* important tokens while running
    the standard grouped suppression pipeline. Explicit ``scores``/``tau``
    bypass the principal-direction scoring and adaptive threshold (with
    injected scores the whole matrix is treated as a single group).
    """
    arr = as_token_matrix(X)
    T, D = arr.shape
    if order not in ("ascend", "descend"):
        raise ParameterError(f"order must be 'ascend' or 'descend', got {order!r}")
    if not 1 <= N <= T:
        raise ParameterError(f"budget N={N} out of range [1, {T}]")

    injected = scores is not None
    if injected:
        scores = np.asarray(scores, dtype=np.float64)
        if scores.shape != (T,):
            raise ParameterError(f"need {T} scores, got shape {scores.shape}")
        groups = [np.arange(T, dtype=np.intp)]
    else:
        if K is None:
            K = default_group_count(N, shape=(T, D)) if N >= 4 else 1
        else:
            K = clamp_group_count(K, (T, D))
        assignment = psca_group(arr, K, seed=seed, svd_iters=PIPELINE_SVD_ITERS)
        scores = assignment.scores
        groups = assignment.groups()

    if order == "ascend":
        ranked = _order_by_score(np.arange(T, dtype=np.intp), scores)
        return select_tokens([ranked], scores, np.asarray([N]), groups=[ranked], budget=N)

    # descend: run the grouped pipeline on negated scores
    xn, nonzero = _normalize_with_count(arr)
    if tau is None:
        rho = _mean_similarity_from_normalized(xn, nonzero)
        tau, _ = nms_threshold(rho, N, alpha)
    _, _, selection = grouped_nms_selection(xn, groups, -scores, float(tau), N)
    return selection


def informativeness_objective(subset, scores, S) -> InformativenessScore:
    """Gain minus clipped-similarity penalty for a retained subset.

    gain = sum of scores over the subset; penalty = sum over subset pairs of
    max(0, similarity); anti-correlated tokens share no information so their
    negative similarity does not reduce the penalty.
    """
    idx = np.asarray(subset, dtype=np.intp)
    if idx.size != np.unique(idx).size:
        raise ValidationError("subset indices must be unique")
    scores = np.asarray(scores, dtype=np.float64)
    mat = np.asarray(S, dtype=np.float64)
    gain = float(scores[idx].sum())
    if idx.size < 2:
        return InformativenessScore(gain=gain, penalty=0.0, J=gain)
    block = mat[np.ix_(idx, idx)]
    pairs = block[np.triu_indices(idx.size, k=1)]
    penalty = float(np.clip(pairs, 0.0, None).sum())
    return InformativenessScore(gain=gain, penalty=penalty, J=gain - penalty)


def brute_force_best_subset(
    X,
    N: int,
    *,
    K: int | None = None,
    seed: int = 0,
    scores=None,
    S=None,
) -> tuple[tuple[int, ...], float]:
    """Exhaustively maximize the informativeness objective over size-N subsets.

    Desk-scale only: refuses T > 16 or more than 20000 candidate subsets.
    Ties break to the lexicographically smallest subset. Returns
    (best subset, best J).
    """
    arr = as_token_matrix(X)
    T, D = arr.shape
    if not 1 <= N <= T:
        raise ParameterError(f"budget N={N} out of range [1, {T}]")
    if T > _BRUTE_MAX_TOKENS:
        raise ScaleGuardError(f"brute force limited to T <= {_BRUTE_MAX_TOKENS}, got {T}")
    n_subsets = math.comb(T, N)
    if n_subsets > _BRUTE_MAX_SUBSETS:
        raise ScaleGuardError(
            f"{n_subsets} subsets exceeds the {_BRUTE_MAX_SUBSETS} enumeration guard"
        )

    if scores is None:
        if K is None:
            K = default_group_count(N, shape=(T, D)) if N >= 4 else 1
        scores = psca_group(arr, K, seed=seed, svd_iters=PIPELINE_SVD_ITERS).scores
    scores = np.asarray(scores, dtype=np.float64)
    mat = pairwise_similarity(arr) if S is None else np.asarray(S, dtype=np.float64)
    clipped = np.clip(mat, 0.0, None)

    best_subset: tuple[int, ...] | None = None
    best_J = -np.inf
    for subset in itertools.combinations(range(T), N):
        idx = list(subset)
        gain = scores[idx].sum()
        block = clipped[np.ix_(idx, idx)]
        penalty = (block.sum() - np.trace(block)) / 2.0
        J = float(gain - penalty)
        if J > best_J:  # strict: earlier (lexicographically smaller) subset wins ties
            best_J = J
            best_subset = subset
    assert best_subset is not None
    return best_subset, best_J
