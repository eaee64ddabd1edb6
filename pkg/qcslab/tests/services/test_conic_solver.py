"""
Unit tests for the first-order conic solver.
"""

import math
import unittest

import numpy as np

from qcslab.errors import InfeasibleProblemError, InvalidArgumentError
from qcslab.services import recover
from qcslab.services.conic_solver import AffineProjector, ConicProgram, conic_solve, operator_norm
from qcslab.services.quantize import quantize_measurements
from qcslab.services.signals import generate_sparse_signal
from qcslab.tests.oracle import OracleBudget, dense_reference_solve, grid_search_2d


def _disk_program():
    """min |z₁| + |z₂| s.t. ‖z − (1, 0)‖₂ ≤ 0.5, as z − w = (1, 0), ‖w‖ ≤ 0.5."""
    E = np.hstack([np.eye(2), -np.eye(2)])
    return ConicProgram(E, np.array([1.0, 0.0]), 2, 1.0, [(2, 0.5)])


class TestConicProgram(unittest.TestCase):
    """Validation of the program data."""

    def test_block_sizes_must_add_up(self):
        with self.assertRaises(InvalidArgumentError):
            ConicProgram(np.eye(3), np.zeros(3), 1, 1.0, [(1, 1.0)])

    def test_rows_must_match(self):
        with self.assertRaises(InvalidArgumentError):
            ConicProgram(np.eye(3), np.zeros(2), 3)

    def test_negative_radius(self):
        with self.assertRaises(InvalidArgumentError):
            ConicProgram(np.eye(2), np.zeros(2), 1, 1.0, [(1, -0.1)])

    def test_non_finite_data(self):
        with self.assertRaises(InvalidArgumentError):
            ConicProgram(np.array([[np.nan]]), np.zeros(1), 1)

    def test_block_slices(self):
        program = ConicProgram(np.ones((1, 6)), np.ones(1), 2, 1.0, [(3, 1.0), (1, 2.0)])
        self.assertEqual(program.block_slices(), [slice(2, 5), slice(5, 6)])


class TestConicSolve(unittest.TestCase):
    """Tests for conic_solve."""

    def test_disk_instance(self):
        solution = conic_solve(_disk_program())
        self.assertTrue(solution.converged)
        self.assertTrue(np.allclose(solution.x_hat, [0.5, 0.0], atol=1e-4))
        self.assertAlmostEqual(solution.objective, 0.5, delta=1e-4)

    def test_disk_instance_matches_grid_search(self):
        point, value = grid_search_2d(
            lambda z: float(np.sum(np.abs(z))),
            lambda z: (z[0] - 1) ** 2 + z[1] ** 2 <= 0.25 + 1e-12,
            ((0.0, 1.0), (-0.5, 0.5)),
            OracleBudget(grid_resolution=101),
        )
        self.assertAlmostEqual(value, 0.5, places=9)
        self.assertAlmostEqual(conic_solve(_disk_program()).objective, value, delta=1e-4)

    def test_dual_bound_below_objective(self):
        solution = conic_solve(_disk_program())
        self.assertLessEqual(solution.dual_bound, 0.5 + 1e-9)
        self.assertGreater(solution.dual_bound, 0.5 - 1e-4)

    def test_pure_projection(self):
        E = np.array([[1.0, 1.0]])
        solution = conic_solve(ConicProgram(E, np.array([2.0]), 1, 0.0, [(1, 5.0)]))
        self.assertTrue(solution.converged)
        self.assertLessEqual(solution.feas_residuals['equality'], 0.0)
        self.assertLessEqual(solution.feas_residuals['ball_1'], 1e-6)

    def test_infeasible_ball(self):
        program = ConicProgram(np.eye(2), np.array([1.0, 0.0]), 0, 1.0, [(2, 0.1)])
        with self.assertRaises(InfeasibleProblemError):
            conic_solve(program)

    def test_inconsistent_equalities(self):
        E = np.array([[1.0], [1.0]])
        with self.assertRaises(InfeasibleProblemError):
            AffineProjector(E, np.array([1.0, 2.0]))

    def test_iteration_cap_reports_unconverged(self):
        solution = conic_solve(_disk_program(), max_iterations=3, check_every=1)
        self.assertFalse(solution.converged)
        self.assertEqual(solution.iterations, 3)

    def test_deterministic(self):
        a = conic_solve(_disk_program())
        b = conic_solve(_disk_program())
        self.assertTrue(np.array_equal(a.x_hat, b.x_hat))
        self.assertEqual(a.iterations, b.iterations)

    def test_operator_norm(self):
        A = np.diag([3.0, 1.0, 0.5])
        self.assertAlmostEqual(operator_norm(A), 3.0, places=6)
        self.assertEqual(operator_norm(np.zeros((2, 2))), 0.0)


class TestReferenceAgreement(unittest.TestCase):
    """ADMM against the cvxpy reference on small one-stage programs."""

    def test_random_instances(self):
        for trial in range(20):
            with self.subTest(trial=trial):
                rng = np.random.default_rng(1000 + trial)
                n = int(rng.integers(10, 21))
                m = n // 2
                phi = rng.standard_normal((m, n))
                signal = generate_sparse_signal(n, 2, rng)
                r = 1 + trial % 2
                q = quantize_measurements(phi @ signal.x, r, 0.1)['q']
                problem = recover.build_standard_problem(phi, q, r, 0.1, eps=0.01 * (trial % 3))
                ours = recover.solve(problem)
                reference = dense_reference_solve(problem)
                self.assertTrue(ours.converged)
                self.assertLessEqual(abs(ours.objective - reference.objective), 1e-4 * (1 + reference.objective))

    def test_complex_lifting(self):
        import cvxpy as cp

        from qcslab.services.matrices import gen_partial_bos
        from qcslab.services.operators import diff_inv_matrix

        rng = np.random.default_rng(21)
        A = gen_partial_bos(8, 16, seed=3)
        signal = generate_sparse_signal(16, 2, rng)
        q = quantize_measurements(A.entries @ signal.x, 1, 0.1)['q']
        ours = recover.solve(recover.build_standard_problem(A.entries, q, 1, 0.1))

        z = cp.Variable(16)
        nu = cp.Variable(8, complex=True)
        residual = diff_inv_matrix(1, 8) @ (A.entries @ z + nu - q)
        constraints = [cp.norm(residual, 2) <= 0.5 * 0.1 * math.sqrt(16), cp.norm(nu, 2) <= 0]
        cp.Problem(cp.Minimize(cp.norm1(z)), constraints).solve()
        self.assertLessEqual(abs(ours.objective - float(np.sum(np.abs(z.value)))), 1e-4 * (1 + ours.objective))
