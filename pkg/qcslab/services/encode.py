"""
Bernoulli further-encoding for qcslab.

This module provides the encoder E(q) = B D^{-r} q, its bit accounting, the
bit-packed integer payload, the rotation used to measure in the encoder's
right singular basis, and empirical frequencies of the two events the
encoded-recovery guarantee conditions on.
"""

import logging
import math
from typing import Any, Dict, Tuple

import numpy as np
import scipy.linalg

from qcslab.errors import InvalidArgumentError, PayloadError
from qcslab.models.encoder import Encoder
from qcslab.models.quantization import MidriseAlphabet
from qcslab.services.operators import apply_diff_inv, diff_inv_matrix
from qcslab.services.serialization import frame, unframe
from qcslab.utils.numeric import require_positive_int, stable_hash

logger = logging.getLogger(__name__)

PAYLOAD_MAGIC = b"QCSE"


def make_encoder(L: int, m: int, r: int, seed: int) -> Encoder:
    """
    Draw an L×m matrix with ±1 equiprobable entries.

    Args:
        L: Compressed dimension, L ≤ m
        m: Input dimension
        r: Σ∆ order
        seed: Generator seed

    Returns:
        The Encoder
    """
    require_positive_int(L, "L")
    require_positive_int(m, "m")
    if L > m:
        raise InvalidArgumentError(f"L must not exceed m, got L={L}, m={m}")
    B = np.random.default_rng(seed).choice(np.array([-1.0, 1.0]), size=(L, m))
    return Encoder(B, r, seed)


def encode(enc: Encoder, q: np.ndarray) -> np.ndarray:
    """
    E(q) = B D^{-r} q.

    Args:
        enc: Encoder
        q: Quantized vector of length m (complex vectors are encoded per channel)

    Returns:
        Vector of length L
    """
    q = np.asarray(q)
    if q.ndim != 1 or q.shape[0] != enc.m:
        raise InvalidArgumentError(f"q must have length {enc.m}, got shape {q.shape}")
    return enc.B @ apply_diff_inv(enc.r, q)


def bits_required(L: int, m: int, r: int, K: int) -> int:
    """⌈L((r+1) log₂ m + log₂ 2K)⌉ bits for E(q)."""
    for name, value in (('L', L), ('m', m), ('r', r), ('K', K)):
        require_positive_int(value, name)
    # guard against log rounding pushing an exact integer up by one
    return int(math.ceil(L * ((r + 1) * math.log2(m) + math.log2(2 * K)) - 1e-9))


def direct_bits(m: int, K: int) -> int:
    """⌈m log₂ 2K⌉ bits for q itself."""
    return int(math.ceil(m * math.log2(2 * K) - 1e-9))


def code_width(m: int, r: int, K: int) -> int:
    """Bits per payload integer, ⌈log₂(2K m^{r+1})⌉."""
    return (2 * K * m ** (r + 1) - 1).bit_length()


def payload_integers(enc: Encoder, level_indices: np.ndarray, K: int) -> np.ndarray:
    """
    Exact integers c = B D^{-r}(q/δ + ½) computed from level indices j (q/δ + ½ = j − K).

    |c| < K m^{r+1} for m ≥ 2.
    """
    v = np.asarray(level_indices, dtype=np.int64) - K
    for _ in range(enc.r):
        v = np.cumsum(v)
    return enc.B.astype(np.int64) @ v


def encode_payload(enc: Encoder, q: np.ndarray, alphabet: MidriseAlphabet) -> bytes:
    """
    Serialize E(q) as fixed-width unsigned integers, byte-padded.

    Header {L, m, r, K, delta, seed, channels, width}; the body packs the
    offset codes c + K m^{r+1} − 1 of every channel, least significant first.

    Args:
        enc: Encoder
        q: Quantized measurements over `alphabet` (real or complex)
        alphabet: The quantizer alphabet

    Returns:
        The payload bytes
    """
    q = np.asarray(q)
    channels = [np.real(q), np.imag(q)] if np.iscomplexobj(q) else [q]
    K = alphabet.levels_per_side
    offset = K * enc.m ** (enc.r + 1) - 1
    width = code_width(enc.m, enc.r, K)
    codes = []
    for channel in channels:
        idx, saturated = alphabet.indices(channel)
        if saturated.any() or not np.allclose(alphabet.values(idx), channel, rtol=0, atol=1e-9 * alphabet.delta):
            raise InvalidArgumentError("q is not over the given alphabet")
        codes.extend(int(c) + offset for c in payload_integers(enc, idx, K))
    packed = 0
    for i, code in enumerate(codes):
        packed |= code << (width * i)
    body = packed.to_bytes((width * len(codes) + 7) // 8, "little")
    header = {'L': enc.L, 'm': enc.m, 'r': enc.r, 'K': K, 'delta': alphabet.delta, 'seed': enc.seed,
              'channels': len(channels), 'width': width}
    logger.debug(f"[ENCODE] {len(codes)} codes x {width} bits = {len(body)} bytes")
    return frame(PAYLOAD_MAGIC, header, body)


def decode_payload(blob: bytes) -> Tuple[Dict[str, Any], np.ndarray]:
    """
    Inverse of encode_payload.

    Returns:
        (header, c) with c of shape (channels, L)
    """
    header, body = unframe(blob, PAYLOAD_MAGIC)
    try:
        L, m, r, K = header['L'], header['m'], header['r'], header['K']
        width, channels = header['width'], header['channels']
    except KeyError as e:
        raise PayloadError(f"payload header is missing {e}")
    if width != code_width(m, r, K):
        raise PayloadError(f"payload width {width} does not match header parameters")
    count = L * channels
    if len(body) != (width * count + 7) // 8:
        raise PayloadError(f"payload body has {len(body)} bytes, expected {(width * count + 7) // 8}")
    packed = int.from_bytes(body, "little")
    mask = (1 << width) - 1
    offset = K * m ** (r + 1) - 1
    codes = [((packed >> (width * i)) & mask) - offset for i in range(count)]
    return header, np.array(codes, dtype=np.int64).reshape(channels, L)


def decoded_measurements(enc: Encoder, c: np.ndarray, delta: float) -> np.ndarray:
    """E(q) = δ(c − ½ B D^{-r} 1) from payload integers c (one row per channel)."""
    ones = enc.B @ apply_diff_inv(enc.r, np.ones(enc.m))
    values = delta * (np.asarray(c, dtype=np.float64) - 0.5 * ones)
    if values.shape[0] == 2:
        return values[0] + 1j * values[1]
    return values[0]


def encoder_rotation(enc: Encoder) -> np.ndarray:
    """Right orthogonal factor R (m×m) of B D^{-r} = T S Rᵀ."""
    _, _, Vt = scipy.linalg.svd(enc.B @ diff_inv_matrix(enc.r, enc.m), full_matrices=True)
    return Vt.T


def norm_event_frequency(L: int, m: int, draws: int, seed: int) -> float:
    """Fraction of seeded draws with ‖B‖₂ ≤ √L + 2√m."""
    threshold = math.sqrt(L) + 2 * math.sqrt(m)
    hits = 0
    for t in range(draws):
        B = make_encoder(L, m, 1, stable_hash(seed, t)).B
        hits += scipy.linalg.norm(B, 2) <= threshold
    return hits / draws


def singular_value_event_frequency(L: int, m: int, r: int, draws: int, seed: int) -> float:
    """Fraction of seeded draws with σ_L(B D^{-r}) ≥ (m/L)^{r/2 − 1/4} √m."""
    threshold = (m / L) ** (r / 2 - 0.25) * math.sqrt(m)
    Dinv = diff_inv_matrix(r, m)
    hits = 0
    for t in range(draws):
        B = make_encoder(L, m, r, stable_hash(seed, t)).B
        hits += scipy.linalg.svdvals(B @ Dinv)[L - 1] >= threshold
    return hits / draws


def distortion_rate_sweep(cfg: Any) -> Dict[str, Any]:
    """
    Rate/distortion table of the encoded pipeline; see experiments.run_distortion_rate.
    """
    from qcslab.services.experiments import run_distortion_rate
    return run_distortion_rate(cfg)
