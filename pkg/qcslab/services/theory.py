"""
Theory-derived sizes, ranges and predicted error scalings for qcslab.

Every "log" here is taken in config.LOG_BASE (natural by default) unless the
caller passes a base explicitly.
"""

import logging
import math
from typing import Any, Dict, Optional, Tuple

from qcslab import config
from qcslab.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


def theorem_log(x: float, base: Optional[Any] = None) -> float:
    """Logarithm of x in the configured theorem base."""
    if x <= 0:
        raise InvalidArgumentError(f"log argument must be positive, got {x}")
    b = config.LOG_BASE if base is None else config.parse_log_base(base)
    return math.log(x) / math.log(b)


def restricted_rows(p: int, log_base: Optional[Any] = None) -> Tuple[int, bool]:
    """
    ℓ = min(p, ⌊p^{3/4} log² p⌋), the row count of the coherence argument.

    Returns:
        (ell, capped) where capped is True when the formula exceeded p
    """
    raw = math.floor(p ** 0.75 * theorem_log(p, log_base) ** 2)
    if raw > p:
        logger.debug(f"[THEORY] ell={raw} exceeds p={p}; capped")
        return p, True
    return max(raw, 1), False


def encoded_rows(p: int, m: int, log_base: Optional[Any] = None) -> Tuple[int, bool]:
    """
    L = min(m, ⌊p^{5/8} log² p⌋), the default encoder dimension.

    Returns:
        (L, capped)
    """
    raw = math.floor(p ** 0.625 * theorem_log(p, log_base) ** 2)
    if raw > m:
        return m, True
    return max(raw, 1), False


def k_sweep_bound(p: int, log_base: Optional[Any] = None) -> int:
    """Largest sparsity ⌊√p / log p⌋ covered by the fixed-p guarantee."""
    return math.floor(math.sqrt(p) / theorem_log(p, log_base))


def encoded_sparsity_bound(p: int, log_base: Optional[Any] = None) -> int:
    """Largest sparsity ⌊p^{1/8} log p⌋ covered by the encoded-pipeline guarantee."""
    return math.floor(p ** 0.125 * theorem_log(p, log_base))


def p_sweep_regime(k: int, p: int, p1: int, alpha: float = 0.34, beta: float = 0.3) -> Dict[str, Any]:
    """
    Flags of the growing-p regime: k ≤ p₁^α and p₁ ≤ p ≤ p₁^{1+β}.

    Args:
        k: Sparsity
        p: Current prime
        p1: First prime of the sweep
        alpha: Sparsity exponent
        beta: Range exponent

    Returns:
        Dict with both flags and the thresholds
    """
    k_limit = p1 ** alpha
    p_limit = p1 ** (1 + beta)
    return {
        'k_within': k <= k_limit,
        'p_within': p1 <= p <= p_limit,
        'k_limit': k_limit,
        'p_limit': p_limit,
    }


def modified_error_scale(m: int, ell: int, r: int) -> float:
    """(3πr)^r (m/ℓ)^{−r+1/2}, the predicted error scale of the modified-matrix pipeline."""
    return (3 * math.pi * r) ** r * (m / ell) ** (-r + 0.5)


def chirp_p_scale(p: int, r: int) -> float:
    """p^{−(r−1/2)}."""
    return p ** (-(r - 0.5))


def chirp_k_scale(k_prime: float, r: int) -> float:
    """(k′)^{−r+1/2} with k′ = 1/k."""
    return k_prime ** (-r + 0.5)


def encoded_error_scale(p: int, r: int, log_base: Optional[Any] = None) -> float:
    """(log p / √p)^{r/2 − 3/4}."""
    return (theorem_log(p, log_base) / math.sqrt(p)) ** (r / 2 - 0.75)
