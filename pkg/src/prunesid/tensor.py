"""Dense numeric kernels: sigmoid rescaling, token centering, cosine
similarity, and truncated SVD with an exact small-scale oracle.

Everything here is a pure function computed in 64-bit floats regardless of
the input dtype, so downstream orthonormality and symmetry checks are stable.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ParameterError, ScaleGuardError, ValidationError

DEFAULT_SVD_ITERS = 4
DEFAULT_OVERSAMPLE = 8

_ORACLE_MAX_ELEMENTS = 4096


def as_token_matrix(x) -> np.ndarray:
    """Validate and return a T-by-D float64 token matrix.

    Raises ValidationError on wrong rank, empty axes, or non-finite entries
    (the error names the first offending row/column).
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"token matrix must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"token matrix needs T >= 1 and D >= 1, got {arr.shape}")
    finite = np.isfinite(arr)
    if not finite.all():
        r, c = np.argwhere(~finite)[0]
        raise ValidationError(f"non-finite entry at row {r}, col {c}")
    return arr


@dataclass
class CenteredMatrix:
    """Token matrix with its per-column mean removed."""

    data: np.ndarray  # T x D, column means ~0
    mean: np.ndarray  # length-D vector that was subtracted


@dataclass
class SvdFactors:
    """Truncated SVD factors M ~ U @ diag(S) @ V.T.

    S is descending and nonnegative; V columns are orthonormal and
    sign-fixed so each column's largest-magnitude entry is positive.
    """

    U: np.ndarray  # rows x K
    S: np.ndarray  # K
    V: np.ndarray  # cols x K

    @property
    def rank(self) -> int:
        return self.S.shape[0]


def sigmoid_rescale(X) -> np.ndarray:
    """Map every entry through the logistic function 1 / (1 + e^-x)."""
    arr = as_token_matrix(X)
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-arr))


def center_tokens(Xs) -> CenteredMatrix:
    """Subtract the across-token mean from every row."""
    arr = as_token_matrix(Xs)
    mu = arr.mean(axis=0)
    return CenteredMatrix(data=arr - mu, mean=mu)


def normalized_rows(X) -> np.ndarray:
    """Rows scaled to unit L2 norm; all-zero rows stay all-zero."""
    arr = as_token_matrix(X)
    norms = np.linalg.norm(arr, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    return arr / safe[:, None]


def pairwise_similarity(X) -> np.ndarray:
    """Full T-by-T cosine similarity matrix.

    A zero-norm row has similarity 0 to every row, itself included, so a
    contentless token neither suppresses nor gets suppressed under any
    positive threshold.
    """
    xn = normalized_rows(X)
    return xn @ xn.T


def _sign_fix(U: np.ndarray, V: np.ndarray) -> None:
    """Flip factor columns so each V column's largest-|entry| is positive."""
    for j in range(V.shape[1]):
        i = int(np.argmax(np.abs(V[:, j])))
        if V[i, j] < 0:
            V[:, j] *= -1.0
            U[:, j] *= -1.0


def truncated_svd(
    M,
    K: int,
    iters: int = DEFAULT_SVD_ITERS,
    seed: int = 0,
    oversample: int = DEFAULT_OVERSAMPLE,
) -> SvdFactors:
    """Rank-K SVD by randomized subspace iteration.

    Deterministic for a fixed seed. Each iteration applies M @ M.T to the
    sketch and re-orthonormalizes; with a healthy spectral gap the top-K
    factors match the exact decomposition to high accuracy (see
    exact_svd_oracle for the reference).
    """
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2:
        raise ParameterError(f"matrix must be 2-D, got shape {A.shape}")
    m, n = A.shape
    if not 1 <= K <= min(m, n):
        raise ParameterError(f"K={K} out of range [1, {min(m, n)}] for shape {A.shape}")
    if iters < 2:
        raise ParameterError(f"iters must be >= 2, got {iters}")

    width = min(K + oversample, min(m, n))
    rng = np.random.default_rng(seed)
    sketch = rng.standard_normal((n, width))

    def orth(Y):
        Q, _ = scipy.linalg.qr(Y, mode="economic", check_finite=False)
        return Q

    Q = orth(A @ sketch)
    for _ in range(iters):
        Q = orth(A @ (A.T @ Q))

    B = Q.T @ A
    Ub, S, Vt = np.linalg.svd(B, full_matrices=False)
    U = Q @ Ub[:, :K]
    V = Vt[:K].T.copy()
    S = S[:K].copy()
    _sign_fix(U, V)
    return SvdFactors(U=U, S=S, V=V)


def exact_svd_oracle(M) -> SvdFactors:
    """Full dense SVD, usable as a reference oracle on small matrices.

    Guarded to rows*cols <= 4096 so it never silently becomes a hot path.
    """
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2:
        raise ParameterError(f"matrix must be 2-D, got shape {A.shape}")
    if A.size > _ORACLE_MAX_ELEMENTS:
        raise ScaleGuardError(
            f"exact_svd_oracle is desk-scale only: {A.size} elements exceeds "
            f"{_ORACLE_MAX_ELEMENTS}"
        )
    U, S, Vt = np.linalg.svd(A, full_matrices=False)
    V = Vt.T.copy()
    U = U.copy()
    _sign_fix(U, V)
    return SvdFactors(U=U, S=S, V=V)
