"""
Difference and noise-shaping operators for qcslab.

This module provides the r-th order difference operator D^r and its inverse
(applied by repeated differencing and cumulative summation), the noise-shaping
matrix H = [C_r D^r | (ε/δ) I], the orthogonal factor U of its SVD, and the
type-III DST realization of U for first-order, noiseless quantization.
"""

import logging
from functools import lru_cache
from typing import Union

import numpy as np
import scipy.fft
import scipy.linalg

from qcslab.config import DEFAULT_CR
from qcslab.errors import ComputationError, InvalidArgumentError, UnsupportedOperationError
from qcslab.models.operators import NoiseShapingMatrix, SvdFactors
from qcslab.utils.numeric import as_vector

logger = logging.getLogger(__name__)

ORTHOGONALITY_TOL = 1e-10
RECONSTRUCTION_RTOL = 1e-8


def _check_order(r: int) -> int:
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise InvalidArgumentError(f"order r must be a positive integer, got {r}")
    return int(r)


def apply_diff(r: int, v: np.ndarray) -> np.ndarray:
    """
    Apply D^r along the first axis without materializing D.

    Args:
        r: Order, r ≥ 1
        v: Vector, or matrix whose columns are vectors

    Returns:
        D^r v, with v_t = 0 for t ≤ 0
    """
    r = _check_order(r)
    out = as_vector(v)
    for _ in range(r):
        out = np.diff(out, axis=0, prepend=0)
    return out


def apply_diff_inv(r: int, v: np.ndarray) -> np.ndarray:
    """
    Apply D^{-r} along the first axis as r successive cumulative sums.

    Args:
        r: Order, r ≥ 1
        v: Vector, or matrix whose columns are vectors

    Returns:
        D^{-r} v
    """
    r = _check_order(r)
    out = as_vector(v)
    for _ in range(r):
        out = np.cumsum(out, axis=0)
    return out


def diff_matrix(r: int, m: int) -> np.ndarray:
    """Dense D^r of size m×m."""
    return apply_diff(r, np.eye(m))


def diff_inv_matrix(r: int, m: int) -> np.ndarray:
    """Dense D^{-r} of size m×m; entries are nonnegative integers."""
    return apply_diff_inv(r, np.eye(m))


def build_H(m: int, r: int, delta: float, eps: float = 0.0, cr: float = DEFAULT_CR) -> NoiseShapingMatrix:
    """
    Build the noise-shaping matrix H = [C_r D^r | (ε/δ) I_m].

    Args:
        m: Dimension
        r: Σ∆ order
        delta: Quantizer step δ > 0
        eps: Noise level ε ≥ 0; the identity block is omitted when ε = 0
        cr: Stability constant C_r > 0

    Returns:
        The NoiseShapingMatrix
    """
    if not delta > 0:
        raise InvalidArgumentError(f"delta must be positive, got {delta}")
    if eps < 0:
        raise InvalidArgumentError(f"eps must be nonnegative, got {eps}")
    if not cr > 0:
        raise InvalidArgumentError(f"C_r must be positive, got {cr}")
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise InvalidArgumentError(f"m must be a positive integer, got {m}")
    H = cr * diff_matrix(r, int(m))
    if eps > 0:
        H = np.hstack([H, (eps / delta) * np.eye(int(m))])
    return NoiseShapingMatrix(cr, delta, eps, int(m), _check_order(r), H)


def _canonicalize_signs(U: np.ndarray, V: np.ndarray) -> None:
    # First significant entry of each V column is made positive
    for j in range(V.shape[1]):
        col = V[:, j]
        threshold = 1e-12 * np.max(np.abs(col))
        first = int(np.argmax(np.abs(col) > threshold))
        if col[first] < 0:
            V[:, j] = -col
            U[:, j] = -U[:, j]


def svd_orthogonal_factor(H: NoiseShapingMatrix) -> SvdFactors:
    """
    Compute H = U S Vᵀ with S nonincreasing and canonical column signs.

    For r = 1, ε = 0 the returned U coincides with closed_form_U(m).

    Args:
        H: The noise-shaping matrix

    Returns:
        SvdFactors with verified orthogonality and reconstruction
    """
    try:
        U, S, Vt = scipy.linalg.svd(H.H, full_matrices=False)
    except (np.linalg.LinAlgError, ValueError) as e:
        logger.error(f"[SVD] Decomposition of {H} failed: {e}")
        raise ComputationError(f"SVD of {H} failed: {e}")
    V = Vt.T.copy()
    U = U.copy()
    _canonicalize_signs(U, V)

    orth_residual = float(np.max(np.abs(U.T @ U - np.eye(U.shape[1]))))
    hmax = float(np.max(np.abs(H.H)))
    recon_residual = float(np.max(np.abs((U * S) @ V.T - H.H)))
    logger.debug(f"[SVD] {H}: orthogonality {orth_residual:.2e}, reconstruction {recon_residual:.2e}")
    if orth_residual > ORTHOGONALITY_TOL:
        raise ComputationError(f"U is not orthogonal for {H}", residual=orth_residual)
    if recon_residual > RECONSTRUCTION_RTOL * hmax:
        raise ComputationError(f"SVD does not reconstruct {H}", residual=recon_residual)
    return SvdFactors(U, S, V)


@lru_cache(maxsize=64)
def orthogonal_factor(m: int, r: int, delta: float, eps: float = 0.0, cr: float = DEFAULT_CR) -> np.ndarray:
    """
    Read-only U for build_H(m, r, delta, eps, cr), cached across calls.
    """
    U = svd_orthogonal_factor(build_H(m, r, delta, eps, cr)).U
    U.flags.writeable = False
    return U


def singular_values(H: Union[NoiseShapingMatrix, np.ndarray]) -> np.ndarray:
    """
    Singular values of H in nonincreasing order.

    Args:
        H: A NoiseShapingMatrix or a plain matrix

    Returns:
        The singular values
    """
    matrix = H.H if isinstance(H, NoiseShapingMatrix) else np.asarray(H, dtype=np.float64)
    try:
        return scipy.linalg.svdvals(matrix)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ComputationError(f"singular values failed: {e}")


def closed_form_U(m: int) -> np.ndarray:
    """
    U_kℓ = √(2/(m+½)) (−1)^{k+1} sin((2k−1)ℓπ/(2m+1)), the SVD factor of D for ε = 0.
    """
    k = np.arange(1, m + 1)[:, None]
    ell = np.arange(1, m + 1)[None, :]
    sign = np.where(k % 2 == 1, 1.0, -1.0)
    return np.sqrt(2.0 / (m + 0.5)) * sign * np.sin((2 * k - 1) * ell * np.pi / (2 * m + 1))


def dst3_matrix(N: int) -> np.ndarray:
    """Dense S^{(N)} with S_kℓ = √(2/N) sin((2k−1)ℓπ/(2N)), k, ℓ = 1..N."""
    k = np.arange(1, N + 1)[:, None]
    ell = np.arange(1, N + 1)[None, :]
    return np.sqrt(2.0 / N) * np.sin((2 * k - 1) * ell * np.pi / (2 * N))


def dst3(v: np.ndarray, N: int, method: str = "direct") -> np.ndarray:
    """
    Type-III discrete sine transform along the first axis.

    result_k = Σ_ℓ √(2/N) sin((2k−1)ℓπ/(2N)) v_ℓ

    Args:
        v: Vector of length N, or matrix with N rows
        N: Transform size
        method: 'direct' (dense O(N²)) or 'fft' (scipy.fft.dst)

    Returns:
        The transformed array
    """
    v = as_vector(v)
    if v.shape[0] != N:
        raise InvalidArgumentError(f"dst3 expects {N} entries along axis 0, got {v.shape[0]}")
    if method == "direct":
        return dst3_matrix(N) @ v
    if method == "fft":
        if np.iscomplexobj(v):
            return dst3(v.real, N, method) + 1j * dst3(v.imag, N, method)
        # scipy's type-III DST weights the last input by (−1)^k instead of 2(−1)^k
        w = v.copy()
        w[-1] = 2 * w[-1]
        return scipy.fft.dst(w, type=3, axis=0) * (np.sqrt(2.0 / N) / 2)
    raise InvalidArgumentError(f"method must be 'direct' or 'fft', got {method!r}")


def fast_U_apply(y: np.ndarray, r: int = 1, eps: float = 0.0) -> np.ndarray:
    """
    Apply the closed-form U through a DST-III of size 2m+1.

    (Uy)_j = (−1)^{j+1} √2 (S^{(2m+1)} ỹ)_j, where ỹ has y_k at position 2k
    and zeros elsewhere.

    Args:
        y: Vector of length m, or matrix with m rows
        r: Σ∆ order; only r = 1 is supported
        eps: Noise level; only ε = 0 is supported

    Returns:
        U y
    """
    if r != 1 or eps != 0:
        raise UnsupportedOperationError(f"fast U applies only to r=1, eps=0 (got r={r}, eps={eps})")
    y = as_vector(y)
    m = y.shape[0]
    N = 2 * m + 1
    y_tilde = np.zeros((N,) + y.shape[1:], dtype=y.dtype)
    y_tilde[1:2 * m:2] = y
    out = dst3(y_tilde, N, method="fft")[:m]
    signs = np.sqrt(2.0) * np.where(np.arange(1, m + 1) % 2 == 1, 1.0, -1.0)
    return signs.reshape((m,) + (1,) * (y.ndim - 1)) * out


def apply_U(y: np.ndarray, r: int, delta: float, eps: float = 0.0, cr: float = DEFAULT_CR) -> np.ndarray:
    """
    Multiply by U, through the DST path when it applies and the dense factor otherwise.

    Args:
        y: Vector of length m, or matrix with m rows
        r: Σ∆ order
        delta: Quantizer step
        eps: Noise level
        cr: Stability constant

    Returns:
        U y
    """
    y = as_vector(y)
    if r == 1 and eps == 0:
        return fast_U_apply(y)
    return orthogonal_factor(y.shape[0], r, float(delta), float(eps), float(cr)) @ y
