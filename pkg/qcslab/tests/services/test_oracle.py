"""
Sanity checks for the brute-force verifiers themselves.
"""

import math

import numpy as np
import pytest

from qcslab.errors import BudgetExceededError
from qcslab.services import recover
from qcslab.tests.oracle import (
    OracleBudget,
    dense_reference_solve,
    direct_gauss_check,
    exhaustive_l0_decode,
    grid_search_2d,
)


def test_exhaustive_decode_finds_sparse_signal(rng):
    phi = rng.standard_normal((10, 15))
    x = np.zeros(15)
    x[[2, 11]] = [1.5, -0.7]
    x_hat = exhaustive_l0_decode(phi, phi @ x, 2)
    assert np.max(np.abs(x_hat - x)) < 1e-10


def test_exhaustive_decode_prefers_smaller_support(rng):
    phi = rng.standard_normal((6, 8))
    x = np.zeros(8)
    x[4] = 2.0
    assert np.count_nonzero(exhaustive_l0_decode(phi, phi @ x, 3)) == 1


def test_exhaustive_decode_zero_measurements():
    assert not np.any(exhaustive_l0_decode(np.eye(4), np.zeros(4), 2))


@pytest.mark.parametrize("n,k,budget", [
    (30, 1, OracleBudget()),
    (10, 4, OracleBudget()),
    (20, 3, OracleBudget(max_supports=100)),
])
def test_exhaustive_decode_budget(n, k, budget):
    with pytest.raises(BudgetExceededError):
        exhaustive_l0_decode(np.ones((3, n)), np.ones(3), k, budget)


def test_reference_solve_limit():
    problem = recover.build_standard_problem(np.ones((4, 41)), np.zeros(4), 1, 0.1)
    with pytest.raises(BudgetExceededError):
        dense_reference_solve(problem)


def test_reference_solve_identity():
    q = np.array([0.5, -0.25, 0.0])
    solution = dense_reference_solve(recover.build_standard_problem(np.eye(3), q, 1, 1e-9))
    assert solution.objective == pytest.approx(0.75, abs=1e-5)


def test_grid_search_on_box():
    point, value = grid_search_2d(lambda z: float(z[0] + z[1]), lambda z: z[0] >= 0.3,
                                  ((0.0, 1.0), (0.0, 1.0)), OracleBudget(grid_resolution=11))
    assert value == pytest.approx(0.3)
    assert np.allclose(point, [0.3, 0.0])


def test_grid_search_infeasible():
    point, value = grid_search_2d(lambda z: 0.0, lambda z: False, ((0.0, 1.0), (0.0, 1.0)),
                                  OracleBudget(grid_resolution=5))
    assert math.isinf(value)
    assert np.all(np.isnan(point))


@pytest.mark.parametrize("pair", [((0, 0), (0, 0)), ((0, 1), (2, 5)), ((3, 4), (1, 0))])
def test_direct_gauss_check(pair):
    assert direct_gauss_check(13, 7, pair) < 1e-12
