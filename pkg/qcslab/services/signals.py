"""
Sparse signal and noise generation for qcslab.
"""

import logging
from typing import Optional

import numpy as np

from qcslab.errors import InvalidArgumentError
from qcslab.models.signal import SparseSignal

logger = logging.getLogger(__name__)


def generate_sparse_signal(n: int, k: int, rng: np.random.Generator,
                           support_limit: Optional[int] = None) -> SparseSignal:
    """
    Draw a k-sparse signal with standard normal nonzeros.

    The support is uniform without replacement over the first `support_limit`
    coordinates (all n by default); the rest of the vector is zero padding.

    Args:
        n: Ambient dimension
        k: Sparsity, 0 gives the zero signal
        rng: Generator to draw from
        support_limit: Size of the coordinate pool the support is drawn from

    Returns:
        The SparseSignal
    """
    pool = n if support_limit is None else min(int(support_limit), n)
    if k < 0 or k > pool:
        raise InvalidArgumentError(f"k must lie in [0, {pool}], got {k}")
    x = np.zeros(n)
    support = np.sort(rng.choice(pool, size=k, replace=False)) if k else np.zeros(0, dtype=np.int64)
    x[support] = rng.standard_normal(k)
    return SparseSignal(x, support, k)


def best_k_term_error(x: np.ndarray, k: int) -> float:
    """σ_k(x)_1: ℓ1 norm of x outside its k largest-magnitude entries."""
    if k < 0:
        raise InvalidArgumentError(f"k must be nonnegative, got {k}")
    mags = np.sort(np.abs(np.asarray(x)).ravel())
    if k >= mags.size:
        return 0.0
    return float(np.sum(mags[:mags.size - k]))


def measurement_noise(m: int, eps: float, rng: np.random.Generator, complex_valued: bool = False) -> np.ndarray:
    """
    Noise uniform in [−ε, ε] on every real channel, so ‖η‖_∞ ≤ ε per channel.

    Args:
        m: Length
        eps: Bound ε ≥ 0
        rng: Generator
        complex_valued: Draw independent real and imaginary parts

    Returns:
        η
    """
    if eps < 0:
        raise InvalidArgumentError(f"eps must be nonnegative, got {eps}")
    if eps == 0:
        return np.zeros(m, dtype=np.complex128 if complex_valued else np.float64)
    eta = rng.uniform(-eps, eps, size=m)
    if complex_valued:
        eta = eta + 1j * rng.uniform(-eps, eps, size=m)
    return eta
