"""Intra-group redundancy removal and final token selection.

The pipeline groups tokens, measures global redundancy, derives an adaptive
suppression threshold, runs greedy non-maximum suppression inside each group,
apportions the retained-token budget over the surviving group sizes, and
backfills any shortfall so the output always holds exactly min(N, T) tokens.
"""

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._kernels import greedy_nms_block
from .errors import ParameterError
from .grouping import (
    GroupAssignment,
    clamp_group_count,
    default_group_count,
    group_sizes,
    psca_group,
)
from .tensor import as_token_matrix, sigmoid_rescale

DEFAULT_ALPHA = 32.0
RHO_FLOOR = 0.05
PIPELINE_SVD_ITERS = 2  # enough refinement for grouping; keeps compress fast

REASON_SUPPRESSED = "suppressed-by-nms"
REASON_OVER_QUOTA = "over-quota"

SIMILARITY_SOURCES = ("raw", "rescaled")


@dataclass
class RedundancyStats:
    """Global redundancy, its information-score complement, and the threshold."""

    rho: float  # mean pairwise cosine similarity
    phi: float  # 1 - rho
    tau: float  # suppression threshold lam * max(rho, RHO_FLOOR)
    lam: float  # N / alpha
    alpha: float


@dataclass
class PrunedSelection:
    """Retained token indices plus provenance for everything else.

    Tokens in ``retained`` but not in ``backfilled`` were selected through
    suppression + quota; ``dropped`` pairs each discarded index with why it
    went ("suppressed-by-nms" or "over-quota").
    """

    retained: np.ndarray  # sorted ascending, unique
    quotas: np.ndarray  # length K, sums to the budget
    survivors_per_group: np.ndarray  # length K
    dropped: list[tuple[int, str]] = field(default_factory=list)
    backfilled: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))

    def nms_selected(self) -> np.ndarray:
        """Retained indices that were not backfilled."""
        return np.setdiff1d(self.retained, self.backfilled)


@dataclass
class CompressionResult:
    """Bundle returned by compress: selection, stats, grouping, metadata."""

    selection: PrunedSelection
    stats: RedundancyStats
    assignment: GroupAssignment
    T: int
    D: int
    N: int
    K: int
    config: dict
    identity_selection: bool = False
    note: str | None = None
    timing_us: dict = field(default_factory=dict)


def _order_by_score(indices: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Indices sorted by descending score, ties to the smaller index."""
    idx = np.asarray(indices, dtype=np.intp)
    if idx.size == 0:
        return idx
    return idx[np.lexsort((idx, -scores[idx]))]


def _normalize_with_count(X: np.ndarray) -> tuple[np.ndarray, int]:
    norms = np.linalg.norm(X, axis=1)
    nonzero = int(np.count_nonzero(norms))
    safe = np.where(norms == 0.0, 1.0, norms)
    return X / safe[:, None], nonzero


def mean_pairwise_similarity(X) -> float:
    """Mean cosine similarity over all token pairs, without the T x T matrix.

    Uses sum(pairs) = (||sum of unit rows||^2 - #nonzero rows) / 2, which is
    exactly the pairwise definition with zero-norm rows contributing 0.
    """
    arr = as_token_matrix(X)
    xn, nonzero = _normalize_with_count(arr)
    return _mean_similarity_from_normalized(xn, nonzero)


def _mean_similarity_from_normalized(xn: np.ndarray, nonzero: int) -> float:
    T = xn.shape[0]
    if T < 2:
        warnings.warn("redundancy of a single token is undefined; using 0")
        return 0.0
    colsum = xn.sum(axis=0)
    return (float(colsum @ colsum) - nonzero) / (T * (T - 1))


def global_redundancy(S) -> float:
    """Mean of the strictly-upper-triangular entries of a similarity matrix."""
    mat = np.asarray(S, dtype=np.float64)
    T = mat.shape[0]
    if T < 2:
        warnings.warn("redundancy of a single token is undefined; using 0")
        return 0.0
    upper = mat[np.triu_indices(T, k=1)]
    return float(upper.sum()) * 2.0 / (T * (T - 1))


def nms_threshold(rho: float, N: int, alpha: float = DEFAULT_ALPHA) -> tuple[float, float]:
    """Suppression threshold tau = (N / alpha) * max(rho, RHO_FLOOR).

    The floor keeps suppression meaningful on decorrelated inputs where rho
    would otherwise drive tau to zero or below.
    """
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if N < 1:
        raise ParameterError(f"budget must be >= 1, got {N}")
    lam = N / alpha
    return lam * max(rho, RHO_FLOOR), lam


def redundancy_stats(rho: float, N: int, alpha: float = DEFAULT_ALPHA) -> RedundancyStats:
    tau, lam = nms_threshold(rho, N, alpha)
    return RedundancyStats(rho=rho, phi=1.0 - rho, tau=tau, lam=lam, alpha=alpha)


def intra_group_nms(group, scores, S, tau: float) -> np.ndarray:
    """Greedy suppression inside one group, given a full similarity matrix.

    Tokens are visited in descending score (ties to the smaller original
    index); a token survives iff its similarity to every previously kept
    token is < tau. The first visited token always survives. Returns
    survivor indices in visit order.
    """
    g = np.asarray(group, dtype=np.intp)
    if g.size == 0:
        return g
    if not np.isfinite(tau):
        raise ParameterError(f"tau must be finite, got {tau}")
    scores = np.asarray(scores, dtype=np.float64)
    mat = np.asarray(S, dtype=np.float64)
    block = np.ascontiguousarray(mat[np.ix_(g, g)])
    order = np.lexsort((g, -scores[g]))  # local positions, best first
    kept_local = greedy_nms_block(block, order, float(tau))
    return g[kept_local]


def allocate_quotas(survivor_sizes, N: int) -> np.ndarray:
    """Largest-remainder apportionment of N proportional to survivor sizes.

    Quotas always sum to N exactly; a quota may exceed its group's survivor
    count (the selection step handles the shortfall via backfill).
    """
    sizes = np.asarray(survivor_sizes, dtype=np.float64)
    if sizes.size == 0 or sizes.sum() < 1:
        raise ParameterError("survivor sizes must contain at least one survivor")
    if (sizes < 0).any():
        raise ParameterError("survivor sizes must be nonnegative")
    if N < 0:
        raise ParameterError(f"budget must be nonnegative, got {N}")
    shares = sizes * (float(N) / sizes.sum())
    quotas = np.floor(shares).astype(np.int64)
    leftover = int(N - quotas.sum())
    if leftover > 0:
        remainders = shares - quotas
        order = np.lexsort((np.arange(sizes.size), -remainders))
        quotas[order[:leftover]] += 1
    assert quotas.sum() == N
    return quotas


def select_tokens(survivors, scores, quotas, groups=None, budget=None) -> PrunedSelection:
    """Take the top-quota survivors per group and backfill any shortfall.

    Backfill draws first from survivors left over in other groups, then from
    suppressed tokens (requires ``groups``), both in descending global score
    with ties to the smaller index, until min(budget, T) tokens are retained.
    """
    scores = np.asarray(scores, dtype=np.float64)
    T = scores.shape[0]
    quotas = np.asarray(quotas, dtype=np.int64)
    if len(survivors) != quotas.shape[0]:
        raise ParameterError(
            f"{len(survivors)} survivor lists but {quotas.shape[0]} quotas"
        )
    if budget is None:
        budget = int(quotas.sum())
    target = min(budget, T)

    selected: list[int] = []
    spares: list[int] = []
    survivor_set: set[int] = set()
    for k, surv in enumerate(survivors):
        ranked = _order_by_score(np.asarray(surv, dtype=np.intp), scores)
        survivor_set.update(int(i) for i in ranked)
        take = min(int(quotas[k]), ranked.size)
        selected.extend(int(i) for i in ranked[:take])
        spares.extend(int(i) for i in ranked[take:])

    backfilled: list[int] = []
    need = target - len(selected)
    if need > 0 and spares:
        pool = _order_by_score(np.asarray(spares, dtype=np.intp), scores)
        backfilled.extend(int(i) for i in pool[:need])
        need = target - len(selected) - len(backfilled)
    suppressed_set: set[int] = set()
    if groups is not None:
        members = set()
        for g in groups:
            members.update(int(i) for i in np.asarray(g, dtype=np.intp))
        suppressed_set = members - survivor_set
        if need > 0 and suppressed_set:
            pool = _order_by_score(
                np.asarray(sorted(suppressed_set), dtype=np.intp), scores
            )
            backfilled.extend(int(i) for i in pool[:need])

    retained = np.sort(np.asarray(selected + backfilled, dtype=np.intp))
    retained_set = set(int(i) for i in retained)
    dropped = []
    universe = survivor_set | suppressed_set
    for i in sorted(universe - retained_set):
        reason = REASON_SUPPRESSED if i in suppressed_set else REASON_OVER_QUOTA
        dropped.append((i, reason))

    return PrunedSelection(
        retained=retained,
        quotas=quotas,
        survivors_per_group=np.asarray([len(s) for s in survivors], dtype=np.int64),
        dropped=dropped,
        backfilled=np.asarray(backfilled, dtype=np.intp),
    )


def _similarity_rows(arr: np.ndarray, similarity_source: str) -> np.ndarray:
    if similarity_source not in SIMILARITY_SOURCES:
        raise ParameterError(
            f"similarity_source must be one of {SIMILARITY_SOURCES}, "
            f"got {similarity_source!r}"
        )
    return arr if similarity_source == "raw" else sigmoid_rescale(arr)


def grouped_nms_selection(
    xn: np.ndarray,
    groups: list[np.ndarray],
    order_scores: np.ndarray,
    tau: float,
    N: int,
) -> tuple[list[np.ndarray], np.ndarray, PrunedSelection]:
    """Per-group suppression + quota apportionment + final selection.

    ``xn`` holds unit-norm rows; similarities are computed blockwise per
    group, so the full T x T matrix never materializes. ``order_scores``
    drives every ranking decision (negate it to prefer low-importance
    tokens, as one ablation variant does).
    """
    survivors: list[np.ndarray] = []
    for g in groups:
        if g.size == 0:
            survivors.append(g)
            continue
        block = np.ascontiguousarray(xn[g] @ xn[g].T)
        order = np.lexsort((g, -order_scores[g]))
        kept_local = greedy_nms_block(block, order, float(tau))
        survivors.append(g[kept_local])
    quotas = allocate_quotas([s.size for s in survivors], N)
    selection = select_tokens(survivors, order_scores, quotas, groups=groups, budget=N)
    return survivors, quotas, selection


def compress(
    X,
    N: int,
    *,
    K: int | None = None,
    alpha: float = DEFAULT_ALPHA,
    seed: int = 0,
    similarity_source: str = "raw",
    svd_iters: int = PIPELINE_SVD_ITERS,
) -> CompressionResult:
    """Full compression pipeline for one token matrix.

    Groups tokens by principal direction, measures mean pairwise similarity,
    derives the adaptive threshold, suppresses within groups, apportions the
    budget, and selects exactly min(N, T) tokens. When N >= T the identity
    selection is returned (with grouping and redundancy stats still computed
    for reporting). Deterministic for fixed inputs and seed.
    """
    arr = as_token_matrix(X)
    T, D = arr.shape
    if N < 1:
        raise ParameterError(f"budget must be >= 1, got {N}")

    config = {
        "N": int(N),
        "K": None if K is None else int(K),
        "alpha": float(alpha),
        "seed": int(seed),
        "similarity_source": similarity_source,
        "svd_iters": int(svd_iters),
    }
    timing: dict[str, int] = {}
    t_total = time.perf_counter_ns()

    identity = N >= T
    if K is not None:
        K_used = clamp_group_count(K, (T, D))
    elif identity and N < 4:
        K_used = 1  # nothing to prune; default rule needs N >= 4
    else:
        K_used = default_group_count(N, shape=(T, D))

    t0 = time.perf_counter_ns()
    assignment = psca_group(arr, K_used, seed=seed, svd_iters=svd_iters)
    timing["group_us"] = (time.perf_counter_ns() - t0) // 1000

    t0 = time.perf_counter_ns()
    src = _similarity_rows(arr, similarity_source)
    xn, nonzero = _normalize_with_count(src)
    with warnings.catch_warnings():
        if identity:
            warnings.simplefilter("ignore")  # T == 1 identity case
        rho = _mean_similarity_from_normalized(xn, nonzero)
    stats = redundancy_stats(rho, N, alpha)
    timing["similarity_us"] = (time.perf_counter_ns() - t0) // 1000

    groups = assignment.groups()

    if identity:
        sizes = group_sizes(assignment)
        selection = PrunedSelection(
            retained=np.arange(T, dtype=np.intp),
            quotas=allocate_quotas(sizes, N),
            survivors_per_group=sizes.astype(np.int64),
        )
        timing["total_us"] = (time.perf_counter_ns() - t_total) // 1000
        return CompressionResult(
            selection=selection,
            stats=stats,
            assignment=assignment,
            T=T,
            D=D,
            N=int(N),
            K=K_used,
            config=config,
            identity_selection=True,
            note=f"budget {N} >= {T} tokens; keeping everything",
            timing_us=timing,
        )

    t0 = time.perf_counter_ns()
    survivors, quotas, selection = grouped_nms_selection(
        xn, groups, assignment.scores, stats.tau, N
    )
    timing["nms_select_us"] = (time.perf_counter_ns() - t0) // 1000
    timing["total_us"] = (time.perf_counter_ns() - t_total) // 1000

    return CompressionResult(
        selection=selection,
        stats=stats,
        assignment=assignment,
        T=T,
        D=D,
        N=int(N),
        K=K_used,
        config=config,
        timing_us=timing,
    )
