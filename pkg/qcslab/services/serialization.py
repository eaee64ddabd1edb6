"""
Binary containers for qcslab.

Layout of every container:

    magic (4 bytes) | header length (uint32, little-endian) | JSON header (UTF-8) | arrays

The header names the container type, its metadata and, for each array, the
name, dtype and shape. Arrays follow in header order, row-major and
little-endian: '<f8' for reals, '<c16' for complex (interleaved re/im) and
'<i8' for integers.
"""

import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from qcslab.errors import PayloadError
from qcslab.models.ensemble import MeasurementEnsemble
from qcslab.models.problem import OneStageProblem, RecoverySolution
from qcslab.models.quantization import MidriseAlphabet
from qcslab.utils.numeric import to_jsonable

logger = logging.getLogger(__name__)

MAGIC = b"QCSL"
_DTYPES = {'f8': '<f8', 'c16': '<c16', 'i8': '<i8'}

PathLike = Union[str, Path]


def _dtype_code(arr: np.ndarray) -> str:
    if np.iscomplexobj(arr):
        return 'c16'
    if np.issubdtype(arr.dtype, np.integer) or arr.dtype == np.bool_:
        return 'i8'
    return 'f8'


def frame(magic: bytes, header: Dict[str, Any], body: bytes = b"") -> bytes:
    """Prefix a body with magic, header length and JSON header."""
    encoded = json.dumps(to_jsonable(header), sort_keys=True).encode("utf-8")
    return magic + struct.pack("<I", len(encoded)) + encoded + body


def unframe(blob: bytes, magic: bytes) -> Tuple[Dict[str, Any], bytes]:
    """Split a framed blob into (header, body)."""
    if len(blob) < 8 or blob[:4] != magic:
        raise PayloadError(f"not a {magic!r} container")
    (length,) = struct.unpack("<I", blob[4:8])
    if len(blob) < 8 + length:
        raise PayloadError("container header is truncated")
    try:
        header = json.loads(blob[8:8 + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise PayloadError(f"container header is not valid JSON: {e}")
    return header, blob[8 + length:]


def pack(container_type: str, meta: Dict[str, Any], arrays: Dict[str, np.ndarray]) -> bytes:
    """
    Serialize named arrays with metadata.

    Args:
        container_type: 'matrix', 'quantized', 'problem' or 'solution'
        meta: JSON-serializable metadata
        arrays: Arrays in the order they should be written

    Returns:
        The container bytes
    """
    specs, chunks = [], []
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        code = _dtype_code(arr)
        specs.append({'name': name, 'dtype': code, 'shape': list(arr.shape)})
        chunks.append(np.ascontiguousarray(arr, dtype=_DTYPES[code]).tobytes(order="C"))
    header = {'type': container_type, 'meta': meta, 'arrays': specs}
    return frame(MAGIC, header, b"".join(chunks))


def unpack(blob: bytes) -> Tuple[str, Dict[str, Any], Dict[str, np.ndarray]]:
    """
    Inverse of pack.

    Returns:
        (container_type, meta, arrays)
    """
    header, body = unframe(blob, MAGIC)
    arrays: Dict[str, np.ndarray] = {}
    offset = 0
    try:
        for spec in header['arrays']:
            dtype = np.dtype(_DTYPES[spec['dtype']])
            shape = tuple(spec['shape'])
            count = int(np.prod(shape)) if shape else 1
            size = count * dtype.itemsize
            if offset + size > len(body):
                raise PayloadError(f"array {spec['name']!r} is truncated")
            arrays[spec['name']] = np.frombuffer(body, dtype=dtype, count=count, offset=offset).reshape(shape).copy()
            offset += size
        container_type = header['type']
        meta = header.get('meta', {})
    except (KeyError, TypeError) as e:
        raise PayloadError(f"malformed container header: {e}")
    if offset != len(body):
        raise PayloadError(f"{len(body) - offset} trailing bytes after the last array")
    return container_type, meta, arrays


def _expect(blob: bytes, container_type: str) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    found, meta, arrays = unpack(blob)
    if found != container_type:
        raise PayloadError(f"expected a {container_type} container, found {found!r}")
    return meta, arrays


def dump_matrix(ensemble: MeasurementEnsemble) -> bytes:
    """Container with header {kind, m, n, seed, complex_flag} and the entries."""
    return pack('matrix', ensemble.header(), {'entries': ensemble.entries})


def load_matrix(blob: bytes) -> MeasurementEnsemble:
    meta, arrays = _expect(blob, 'matrix')
    entries = arrays['entries']
    if list(entries.shape) != [meta['m'], meta['n']]:
        raise PayloadError(f"entries shape {entries.shape} does not match header m={meta['m']}, n={meta['n']}")
    return MeasurementEnsemble(meta['kind'], entries, seed=meta['seed'], metadata=meta.get('metadata', {}))


def dump_quantized(q: np.ndarray, alphabet: MidriseAlphabet, r: int) -> bytes:
    """
    Quantized measurements as integer level indices plus (δ, K, r).

    Complex vectors store one index row per channel.
    """
    q = np.asarray(q)
    channels = [np.real(q), np.imag(q)] if np.iscomplexobj(q) else [q]
    indices = np.vstack([alphabet.indices(c)[0] for c in channels])
    meta = {'delta': alphabet.delta, 'K': alphabet.levels_per_side, 'r': int(r), 'complex_flag': len(channels) == 2}
    return pack('quantized', meta, {'indices': indices})


def load_quantized(blob: bytes) -> Tuple[np.ndarray, MidriseAlphabet, int]:
    """
    Returns:
        (q, alphabet, r)
    """
    meta, arrays = _expect(blob, 'quantized')
    alphabet = MidriseAlphabet(meta['delta'], meta['K'])
    indices = arrays['indices']
    if np.any(indices < 1) or np.any(indices > alphabet.size):
        raise PayloadError("level index outside 1..2K")
    values = alphabet.values(indices)
    q = values[0] + 1j * values[1] if meta.get('complex_flag') else values[0]
    return q, alphabet, int(meta['r'])


def dump_problem(problem: OneStageProblem) -> bytes:
    arrays = {'phi_eff': problem.phi_eff, 'q_eff': problem.q_eff}
    if problem.B is not None:
        arrays['B'] = problem.B.astype(np.int64)
    return pack('problem', problem.header(), arrays)


def load_problem(blob: bytes) -> OneStageProblem:
    meta, arrays = _expect(blob, 'problem')
    B = arrays['B'].astype(np.float64) if 'B' in arrays else None
    return OneStageProblem(arrays['phi_eff'], arrays['q_eff'], meta['r'], meta['tau1'], meta['tau2'],
                           variant=meta['variant'], channels=meta['channels'], B=B, tol_eq=meta['tol_eq'])


def dump_solution(solution: RecoverySolution) -> bytes:
    arrays = {'x_hat': solution.x_hat, 'nu_hat': solution.nu_hat}
    if solution.u_hat is not None:
        arrays['u_hat'] = solution.u_hat
    return pack('solution', solution.to_dict(), arrays)


def load_solution(blob: bytes) -> RecoverySolution:
    meta, arrays = _expect(blob, 'solution')
    return RecoverySolution(arrays['x_hat'], arrays['nu_hat'], meta['objective'], meta['feas_residuals'],
                            meta['iterations'], meta['converged'], dual_bound=meta['dual_bound'],
                            u_hat=arrays.get('u_hat'))


def write_file(path: PathLike, blob: bytes) -> None:
    Path(path).write_bytes(blob)
    logger.debug(f"[CONTAINER] wrote {len(blob)} bytes to {path}")


def read_file(path: PathLike) -> bytes:
    return Path(path).read_bytes()
