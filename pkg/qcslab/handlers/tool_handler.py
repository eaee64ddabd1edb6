"""
Single-shot tool handlers for qcslab.

This module provides the `gen-matrix`, `quantize`, `recover` and `encode`
sub-commands. Each reads and writes the binary containers of
qcslab.services.serialization and returns a JSON summary.
"""

import logging
from typing import Any, Dict, Optional

import numpy as np

from qcslab.errors import InvalidArgumentError
from qcslab.handlers.responses import error_response, ok
from qcslab.models.ensemble import MeasurementEnsemble
from qcslab.models.quantization import BufferConfig
from qcslab.services import recover, serialization
from qcslab.services.encode import (
    bits_required,
    decode_payload,
    direct_bits,
    encode_payload,
    make_encoder,
    payload_integers,
)
from qcslab.services.matrices import gen_chirp, gen_chirp_sub, gen_partial_bos, gen_subgaussian, modify_with_U
from qcslab.services.operators import orthogonal_factor
from qcslab.services.quantize import buffer_pipeline, quantize_measurements
from qcslab.services.signals import generate_sparse_signal, measurement_noise

logger = logging.getLogger(__name__)

MATRIX_KINDS = ("gaussian", "bernoulli", "partial_dft", "partial_dct", "partial_dst", "chirp", "chirp_sub")


def build_matrix(kind: str, m: Optional[int], n: Optional[int], p: Optional[int], seed: int) -> MeasurementEnsemble:
    if kind in ("chirp", "chirp_sub"):
        if p is None:
            raise InvalidArgumentError(f"{kind} needs --p")
        return gen_chirp(p) if kind == "chirp" else gen_chirp_sub(p)
    if m is None or n is None:
        raise InvalidArgumentError(f"{kind} needs --m and --n")
    if kind in ("gaussian", "bernoulli"):
        return gen_subgaussian(m, n, seed, kind)
    if kind in ("partial_dft", "partial_dct", "partial_dst"):
        return gen_partial_bos(m, n, seed, kind.split("_", 1)[1])
    raise InvalidArgumentError(f"kind must be one of {MATRIX_KINDS}, got {kind!r}")


def handle_gen_matrix(kind: str, out: str, m: Optional[int] = None, n: Optional[int] = None,
                      p: Optional[int] = None, seed: int = 0, modify_r: Optional[int] = None,
                      delta: float = 0.1, eps: float = 0.0) -> Dict[str, Any]:
    """
    Generate a measurement matrix, optionally premultiplied by U, and save it.

    Returns:
        Handler response with the container header
    """
    logger.info(f"[GEN_MATRIX] kind={kind} m={m} n={n} p={p} seed={seed} modify_r={modify_r}")
    try:
        ensemble = build_matrix(kind, m, n, p, seed)
        if modify_r is not None:
            ensemble = modify_with_U(ensemble, modify_r, delta, eps)
        serialization.write_file(out, serialization.dump_matrix(ensemble))
    except Exception as e:
        return error_response(e, "GEN_MATRIX")
    header = ensemble.header()
    header.pop('metadata')
    return ok(dict(header, out=out))


def handle_quantize(matrix_path: str, out: str, signal_out: str, k: int, r: int, delta: float,
                    seed: int = 0, eps: float = 0.0, m_max: Optional[int] = None) -> Dict[str, Any]:
    """
    Draw a k-sparse signal, measure it and Σ∆-quantize the measurements.

    With m_max set the digital-buffer pipeline is used instead of plain Σ∆.

    Returns:
        Handler response with quantizer diagnostics
    """
    logger.info(f"[QUANTIZE] matrix={matrix_path} k={k} r={r} delta={delta} buffer={m_max is not None}")
    try:
        ensemble = serialization.load_matrix(serialization.read_file(matrix_path))
        rng = np.random.default_rng(seed)
        signal = generate_sparse_signal(ensemble.n, k, rng)
        y = ensemble.entries @ signal.x + measurement_noise(ensemble.m, eps, rng, ensemble.is_complex)
        if m_max is not None:
            result = buffer_pipeline(y, BufferConfig(delta, r, m_max, eps))
        else:
            result = quantize_measurements(y, r, delta)
        serialization.write_file(out, serialization.dump_quantized(result['q'], result['alphabet'], r))
        serialization.write_file(signal_out, serialization.pack('signal', signal.to_dict(), {'x': signal.x}))
    except Exception as e:
        return error_response(e, "QUANTIZE")
    return ok({
        'm': ensemble.m,
        'K': result['alphabet'].levels_per_side,
        'overload': result['overload'],
        'saturated': result['saturated'],
        'buffer': m_max is not None,
        'out': out,
        'signal_out': signal_out,
    })


def _load_signal(path: str) -> np.ndarray:
    container_type, _, arrays = serialization.unpack(serialization.read_file(path))
    if container_type != 'signal':
        raise InvalidArgumentError(f"{path} holds a {container_type} container, expected a signal")
    return arrays['x']


def handle_recover(matrix_path: str, quantized_path: str, out: str, variant: str = "standard",
                   eps: float = 0.0, m_max: Optional[int] = None,
                   signal_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Solve the one-stage program for saved measurements.

    The standard variant takes the matrix as the measurement matrix used; the
    buffer variant takes the plain Φ and forms UΦ with U built from δ″.

    Returns:
        Handler response with solver diagnostics (and the error when a signal is given)
    """
    logger.info(f"[RECOVER_HANDLER] matrix={matrix_path} quantized={quantized_path} variant={variant}")
    try:
        ensemble = serialization.load_matrix(serialization.read_file(matrix_path))
        q, alphabet, r = serialization.load_quantized(serialization.read_file(quantized_path))
        if variant == "standard":
            problem = recover.build_standard_problem(ensemble.entries, q, r, alphabet.delta, eps)
        elif variant == "buffer":
            if m_max is None:
                raise InvalidArgumentError("the buffer variant needs --m-max")
            cfg = BufferConfig(alphabet.delta, r, m_max, eps)
            U = orthogonal_factor(ensemble.m, r, alphabet.delta, cfg.delta_dprime)
            problem = recover.build_buffer_problem(U @ ensemble.entries, q, r, alphabet.delta, cfg.delta_dprime)
        else:
            raise InvalidArgumentError(f"variant must be 'standard' or 'buffer', got {variant!r}")
        solution = recover.solve(problem)
        serialization.write_file(out, serialization.dump_solution(solution))
        body = dict(solution.to_dict(), variant=variant, out=out)
        if signal_path is not None:
            body['reconstruction_error'] = float(np.linalg.norm(_load_signal(signal_path) - solution.x_hat))
    except Exception as e:
        return error_response(e, "RECOVER_HANDLER")
    return ok(body)


def handle_encode(quantized_path: str, out: str, L: int, seed: int = 0) -> Dict[str, Any]:
    """
    Encode saved Σ∆ output with a seeded Bernoulli matrix and write the payload.

    The payload is decoded again before returning; a mismatch is an error.

    Returns:
        Handler response with the bit accounting
    """
    logger.info(f"[ENCODE_HANDLER] quantized={quantized_path} L={L} seed={seed}")
    try:
        q, alphabet, r = serialization.load_quantized(serialization.read_file(quantized_path))
        m = q.shape[0]
        channels = 2 if np.iscomplexobj(q) else 1
        encoder = make_encoder(L, m, r, seed)
        blob = encode_payload(encoder, q, alphabet)
        _, decoded = decode_payload(blob)
        parts = [np.real(q), np.imag(q)] if channels == 2 else [q]
        expected = np.vstack([payload_integers(encoder, alphabet.indices(part)[0], alphabet.levels_per_side)
                              for part in parts])
        if not np.array_equal(decoded, expected):
            raise InvalidArgumentError("payload did not round-trip")
        serialization.write_file(out, blob)
        K = alphabet.levels_per_side
    except Exception as e:
        return error_response(e, "ENCODE_HANDLER")
    return ok({
        'L': L,
        'm': m,
        'r': r,
        'K': K,
        'channels': channels,
        'bits_required': channels * bits_required(L, m, r, K),
        'direct_bits': channels * direct_bits(m, K),
        'payload_bytes': len(blob),
        'out': out,
    })
