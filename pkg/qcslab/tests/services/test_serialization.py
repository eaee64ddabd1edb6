"""
Unit tests for the binary containers.
"""

import struct

import numpy as np
import pytest

from qcslab.errors import PayloadError
from qcslab.models.quantization import MidriseAlphabet
from qcslab.services import recover, serialization
from qcslab.services.encode import make_encoder
from qcslab.services.matrices import gen_chirp_sub, gen_subgaussian
from qcslab.services.quantize import quantize_measurements


def test_layout_prefix():
    blob = serialization.pack('matrix', {'m': 1}, {'entries': np.zeros((1, 1))})
    assert blob[:4] == serialization.MAGIC
    (length,) = struct.unpack("<I", blob[4:8])
    assert len(blob) == 8 + length + 8


def test_complex_matrix_is_bit_exact():
    A = gen_chirp_sub(13)
    restored = serialization.load_matrix(serialization.dump_matrix(A))
    assert restored.kind == "chirp_sub"
    assert restored.entries.dtype == np.complex128
    assert np.array_equal(restored.entries, A.entries)
    assert restored.metadata['p'] == 13


def test_real_matrix_keeps_seed():
    A = gen_subgaussian(4, 9, seed=42)
    restored = serialization.load_matrix(serialization.dump_matrix(A))
    assert restored.seed == 42
    assert np.array_equal(restored.entries, A.entries)


def test_quantized_real_and_complex():
    rng = np.random.default_rng(0)
    for y in (rng.uniform(-1, 1, 12), rng.uniform(-1, 1, 12) + 1j * rng.uniform(-1, 1, 12)):
        result = quantize_measurements(y, 2, 0.1)
        q, alphabet, r = serialization.load_quantized(
            serialization.dump_quantized(result['q'], result['alphabet'], 2))
        assert r == 2
        assert alphabet.levels_per_side == result['alphabet'].levels_per_side
        assert np.array_equal(q, result['q'])


def test_quantized_index_out_of_range():
    blob = serialization.pack('quantized', {'delta': 0.1, 'K': 1, 'r': 1, 'complex_flag': False},
                              {'indices': np.array([[1, 3]])})
    with pytest.raises(PayloadError):
        serialization.load_quantized(blob)


def test_problem_round_trip():
    enc = make_encoder(3, 6, 1, seed=2)
    problem = recover.build_encoded_problem(np.ones((6, 4)), np.full(6, 0.05), enc, 0.1, eps=0.01)
    restored = serialization.load_problem(serialization.dump_problem(problem))
    assert restored.variant == "encoded"
    assert np.array_equal(restored.B, problem.B)
    assert restored.tau1 == problem.tau1 and restored.tau2 == problem.tau2


def test_solution_round_trip():
    solution = recover.solve(recover.build_standard_problem(np.eye(3), np.array([0.05, -0.05, 0.15]), 1, 0.1))
    restored = serialization.load_solution(serialization.dump_solution(solution))
    assert np.array_equal(restored.x_hat, solution.x_hat)
    assert restored.converged == solution.converged
    assert restored.iterations == solution.iterations


def test_wrong_container_type():
    blob = serialization.dump_quantized(np.array([0.05]), MidriseAlphabet(0.1, 1), 1)
    with pytest.raises(PayloadError):
        serialization.load_matrix(blob)


@pytest.mark.parametrize("mutate", [
    lambda b: b[:-3],
    lambda b: b + b"\x00",
    lambda b: b"QCSX" + b[4:],
    lambda b: b[:4] + struct.pack("<I", 10 ** 6) + b[8:],
])
def test_corrupted_containers(mutate):
    blob = serialization.dump_matrix(gen_subgaussian(2, 3, seed=0))
    with pytest.raises(PayloadError):
        serialization.unpack(mutate(blob))


def test_files(tmp_path):
    path = tmp_path / "A.bin"
    A = gen_subgaussian(3, 5, seed=1)
    serialization.write_file(path, serialization.dump_matrix(A))
    assert np.array_equal(serialization.load_matrix(serialization.read_file(path)).entries, A.entries)
