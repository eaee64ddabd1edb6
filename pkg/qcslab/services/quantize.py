"""
Quantizers for qcslab.

This module provides memoryless scalar quantization (MSQ) over a midrise
alphabet, the greedy r-th order Σ∆ quantizer, its per-channel complex
variant, and the MSQ → U → Σ∆ digital-buffer pipeline.
"""

import logging
import math
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.special import comb

from qcslab.errors import InvalidArgumentError
from qcslab.models.quantization import BufferConfig, MidriseAlphabet, SigmaDeltaTrace
from qcslab.services.operators import orthogonal_factor
from qcslab.utils.numeric import as_vector

logger = logging.getLogger(__name__)

OVERLOAD_SLACK = 1e-12


def required_levels(y: np.ndarray, delta: float, r: int) -> int:
    """Levels per side K = ⌈‖y‖_∞/δ⌉ + 2^r, enough headroom for the greedy rule to stay stable."""
    peak = float(np.max(np.abs(np.asarray(y)))) if np.size(y) else 0.0
    return int(math.ceil(peak / delta)) + 2 ** int(r)


def msq(y: np.ndarray, alphabet: MidriseAlphabet) -> Tuple[np.ndarray, bool]:
    """
    Round every entry to the nearest alphabet level, ties toward +∞.

    Entries with |y| > Kδ saturate at ±(2K−1)δ/2.

    Args:
        y: Real vector
        alphabet: Midrise alphabet

    Returns:
        (q, saturated)
    """
    y = np.asarray(y, dtype=np.float64)
    idx, saturated = alphabet.indices(y)
    if saturated.any():
        logger.warning(f"[MSQ] {int(saturated.sum())} entries exceed K*delta for {alphabet}")
    return alphabet.values(idx), bool(saturated.any())


def sigma_delta(y: np.ndarray, r: int, alphabet: MidriseAlphabet) -> SigmaDeltaTrace:
    """
    Greedy r-th order Σ∆ quantization.

    With u_t = 0 for t ≤ 0:
        s_i = y_i + Σ_{j=1..r} (−1)^{j−1} C(r, j) u_{i−j}
        q_i = nearest level to s_i
        u_i = s_i − q_i
    so that y − q = D^r u.

    Args:
        y: Real vector
        r: Order, r ≥ 1
        alphabet: Midrise alphabet

    Returns:
        SigmaDeltaTrace; overload_flag is set when ‖u‖_∞ > δ/2
    """
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise InvalidArgumentError(f"order r must be a positive integer, got {r}")
    r = int(r)
    y = np.asarray(y, dtype=np.float64).ravel()
    m = y.shape[0]
    coeffs = [float((-1) ** (j - 1) * comb(r, j, exact=True)) for j in range(1, r + 1)]
    delta = alphabet.delta
    K = alphabet.levels_per_side
    half = delta / 2
    q = np.empty(m)
    u = np.zeros(m)
    saturated = False
    for i in range(m):
        s = float(y[i])
        for j in range(1, min(r, i) + 1):
            s += coeffs[j - 1] * u[i - j]
        level = math.floor(s / delta) + K + 1
        if level < 1 or level > 2 * K:
            saturated = True
            level = min(max(level, 1), 2 * K)
        q[i] = (2 * level - 2 * K - 1) * half
        u[i] = s - q[i]
    overload = bool(m and np.max(np.abs(u)) > half * (1 + OVERLOAD_SLACK))
    if overload:
        logger.warning(f"[SIGMA_DELTA] overload: max|u|={np.max(np.abs(u)):.4g} > delta/2 "
                       f"(r={r}, {alphabet})")
    return SigmaDeltaTrace(q, u, r, alphabet, overload_flag=overload, saturated=saturated)


def sigma_delta_complex(y: np.ndarray, r: int, alphabet: MidriseAlphabet) -> Tuple[SigmaDeltaTrace, SigmaDeltaTrace]:
    """Run sigma_delta independently on the real and imaginary channels."""
    y = np.asarray(y)
    return sigma_delta(np.real(y), r, alphabet), sigma_delta(np.imag(y), r, alphabet)


def quantize_measurements(y: np.ndarray, r: int, delta: float,
                          levels_per_side: Optional[int] = None) -> Dict[str, Any]:
    """
    Σ∆-quantize real or complex measurements with an alphabet sized to the input.

    Args:
        y: Measurements
        r: Order
        delta: Step
        levels_per_side: K; defaults to required_levels(y, δ, r)

    Returns:
        Dict with 'q' (same dtype family as y), 'traces', 'alphabet',
        'overload' and 'saturated'
    """
    y = as_vector(y, "y")
    K = required_levels(np.concatenate([np.real(y), np.imag(y)]), delta, r) \
        if levels_per_side is None else int(levels_per_side)
    alphabet = MidriseAlphabet(delta, K)
    if np.iscomplexobj(y):
        traces = list(sigma_delta_complex(y, r, alphabet))
        q = traces[0].q + 1j * traces[1].q
    else:
        traces = [sigma_delta(y, r, alphabet)]
        q = traces[0].q
    return {
        'q': q,
        'traces': traces,
        'alphabet': alphabet,
        'overload': any(t.overload_flag for t in traces),
        'saturated': any(t.saturated for t in traces),
    }


def buffer_pipeline(y: np.ndarray, cfg: BufferConfig, U: Optional[np.ndarray] = None) -> Dict[str, Any]:
    """
    MSQ with step δ′, multiply by U, then Σ∆ with step δ.

    The MSQ output is used once and not returned.

    Args:
        y: Real or complex measurements, length m ≤ cfg.m_max
        cfg: Buffer configuration
        U: m×m orthogonal factor; defaults to the SVD factor of H with ε = δ″

    Returns:
        Dict with 'q', 'y_msq_discarded', 'traces', 'alphabet', 'overload', 'saturated'
    """
    y = as_vector(y, "y")
    m = y.shape[0]
    if m > cfg.m_max:
        raise InvalidArgumentError(f"m={m} exceeds m_max={cfg.m_max}")
    if U is None:
        U = orthogonal_factor(m, cfg.r, cfg.delta, cfg.delta_dprime)
    if U.shape != (m, m):
        raise InvalidArgumentError(f"U must be {m}x{m}, got {U.shape}")

    channels = [np.real(y), np.imag(y)] if np.iscomplexobj(y) else [y]
    peak = max(float(np.max(np.abs(c))) for c in channels)
    msq_alphabet = MidriseAlphabet(cfg.delta_prime, int(math.ceil(peak / cfg.delta_prime)) + 1)
    shaped = []
    msq_saturated = False
    for channel in channels:
        y_msq, sat = msq(channel, msq_alphabet)
        msq_saturated = msq_saturated or sat
        shaped.append(U @ y_msq)
    logger.debug(f"[BUFFER] {cfg}: MSQ levels per side {msq_alphabet.levels_per_side}")

    shaped_y = shaped[0] + 1j * shaped[1] if len(shaped) == 2 else shaped[0]
    result = quantize_measurements(shaped_y, cfg.r, cfg.delta)
    result['y_msq_discarded'] = True
    result['saturated'] = result['saturated'] or msq_saturated
    return result
