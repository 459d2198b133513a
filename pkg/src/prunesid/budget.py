"""Dataset-level dynamic budget allocation.

Each image gets a retained-token count proportional to its information score
(1 - mean pairwise similarity), normalized so the dataset average matches a
target budget, with a per-image floor and cap.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ValidationError

DEFAULT_MIN_BUDGET = 16


@dataclass
class BudgetItem:
    image_id: str
    phi: float
    n_prime: int
    clamped: bool  # hit the floor or a cap at any point


@dataclass
class BudgetPlan:
    per_image: list[BudgetItem]
    target_avg: int
    n_min: int
    caps: list[int] | None

    def n_primes(self) -> np.ndarray:
        return np.asarray([item.n_prime for item in self.per_image], dtype=np.int64)


def information_score(rho: float) -> float:
    """Information score: 1 - redundancy. Higher means more diverse content."""
    return 1.0 - rho


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5).astype(np.int64)


def allocate_dynamic_budgets(
    phis,
    target_avg: int,
    n_min: int = DEFAULT_MIN_BUDGET,
    caps=None,
    image_ids=None,
) -> BudgetPlan:
    """Distribute per-image budgets proportional to information scores.

    raw_i = phi_i / mean(phi) * target_avg is rounded to the nearest integer
    and clamped into [n_min, caps_i]; the residual against
    len(phis) * target_avg is then redistributed one token at a time among
    unclamped images by largest remainder. If every score is zero the
    allocation is uniform (with a warning). The final mean sits within one
    token of the target unless clamping leaves no slack.
    """
    phi = np.asarray(phis, dtype=np.float64)
    if phi.size == 0:
        raise ParameterError("need at least one information score")
    if not np.isfinite(phi).all():
        raise ValidationError("information scores must be finite")
    if not target_avg >= n_min >= 1:
        raise ParameterError(
            f"need target_avg >= n_min >= 1, got target_avg={target_avg}, n_min={n_min}"
        )
    m = phi.size
    if caps is not None:
        caps = [int(c) for c in caps]
        if len(caps) != m:
            raise ParameterError(f"{len(caps)} caps for {m} images")
    if image_ids is None:
        image_ids = [str(i) for i in range(m)]

    cap_of = (lambda i: caps[i]) if caps is not None else (lambda i: None)

    def clamp(i: int, value: int) -> int:
        lo, hi = n_min, cap_of(i)
        value = max(value, lo)
        if hi is not None:
            value = min(value, hi)  # the cap wins over the floor
        return value

    mean_phi = float(phi.mean())
    if mean_phi == 0.0:
        warnings.warn("all information scores are zero; allocating uniformly")
        items = []
        for i in range(m):
            n = clamp(i, int(target_avg))
            items.append(BudgetItem(image_ids[i], float(phi[i]), n, n != target_avg))
        return BudgetPlan(items, int(target_avg), int(n_min), caps)

    raw = phi / mean_phi * float(target_avg)
    alloc = _round_half_up(raw)
    clamped = np.zeros(m, dtype=bool)
    for i in range(m):
        bounded = clamp(i, int(alloc[i]))
        if bounded != alloc[i]:
            clamped[i] = True
            alloc[i] = bounded

    total = m * int(target_avg)
    residual = total - int(alloc.sum())
    while residual != 0:
        remainders = raw - alloc
        if residual > 0:
            eligible = [
                i for i in range(m)
                if not clamped[i] and (cap_of(i) is None or alloc[i] < cap_of(i))
            ]
            if not eligible:
                break
            i = max(eligible, key=lambda i: (remainders[i], -i))
            alloc[i] += 1
            residual -= 1
            if cap_of(i) is not None and alloc[i] == cap_of(i):
                clamped[i] = True
        else:
            eligible = [i for i in range(m) if not clamped[i] and alloc[i] > n_min]
            if not eligible:
                break
            i = min(eligible, key=lambda i: (remainders[i], i))
            alloc[i] -= 1
            residual += 1
            if alloc[i] == n_min:
                clamped[i] = True

    items = [
        BudgetItem(image_ids[i], float(phi[i]), int(alloc[i]), bool(clamped[i]))
        for i in range(m)
    ]
    return BudgetPlan(items, int(target_avg), int(n_min), caps)


def information_histogram(phis, bins: int) -> np.ndarray:
    """Equal-width histogram counts over [min(phi), max(phi)]; sums to len(phis)."""
    phi = np.asarray(phis, dtype=np.float64)
    if bins < 1:
        raise ParameterError(f"bins must be >= 1, got {bins}")
    if phi.size == 0:
        return np.zeros(bins, dtype=np.int64)
    lo, hi = float(phi.min()), float(phi.max())
    if lo == hi:
        counts = np.zeros(bins, dtype=np.int64)
        counts[0] = phi.size
        return counts
    counts, _ = np.histogram(phi, bins=bins, range=(lo, hi))
    return counts.astype(np.int64)
