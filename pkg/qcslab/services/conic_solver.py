"""
First-order conic solver for qcslab.

This module provides a deterministic ADMM (Douglas-Rachford) solver for

    minimize    w ‖x₀‖₁
    subject to  E [x₀; x₁; …; x_J] = b,   ‖x_j‖₂ ≤ ρ_j  (j = 1..J)

which covers all three one-stage recovery programs. The problem is split as
F(x) = w‖x₀‖₁ + Σ ball indicators (separable prox) and G = indicator of the
affine set (a cached projection). Columns of E are rescaled to unit norm;
each ball block shares one scale so its prox stays a ball projection.

Every `check_every` iterations the solver:
    * checks iterates for NaN/∞ (NumericalError),
    * forms the multiplier μ = −(E_s E_sᵀ)⁻¹ E_s (pen·u) and a valid dual bound,
    * tests the primal-residual and duality-gap stopping rule,
    * looks for a Farkas certificate of infeasibility (InfeasibleProblemError),
    * rebalances the penalty during the first half of the iteration budget.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from qcslab import config
from qcslab.errors import InfeasibleProblemError, InvalidArgumentError, NumericalError
from qcslab.models.problem import RecoverySolution

logger = logging.getLogger(__name__)

OVER_RELAXATION = 1.6
RESIDUAL_GAP = 10.0
PENALTY_FACTOR = 2.0
PENALTY_RANGE = (1e-6, 1e6)
CERTIFICATE_CHECKS = 5
CERTIFICATE_ORTHOGONALITY = 1e-9
CERTIFICATE_MARGIN = 1e-6
CONSISTENCY_RTOL = 1e-8
# leaves room for rounding when callers recompute residuals through other operators
BALL_MARGIN = 0.5


class ConicProgram:
    """
    Data of  min w‖x₀‖₁  s.t.  E x = b,  ‖x_j‖₂ ≤ ρ_j.

    Attributes:
        E: Real constraint matrix, columns ordered [x₀ | x₁ | … | x_J]
        b: Right-hand side
        l1_size: Length of x₀ (may be 0)
        l1_weight: w ≥ 0
        balls: (size, radius) of each ball block, in column order after x₀
    """

    def __init__(self, E: np.ndarray, b: np.ndarray, l1_size: int, l1_weight: float = 1.0,
                 balls: Sequence[Tuple[int, float]] = ()):
        E = np.asarray(E, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64).ravel()
        if E.ndim != 2 or E.shape[0] != b.shape[0]:
            raise InvalidArgumentError(f"E rows must match b, got {E.shape} and {b.shape}")
        if not np.all(np.isfinite(E)) or not np.all(np.isfinite(b)):
            raise InvalidArgumentError("E and b must be finite")
        if l1_weight < 0:
            raise InvalidArgumentError(f"l1_weight must be nonnegative, got {l1_weight}")
        balls = [(int(size), float(radius)) for size, radius in balls]
        if any(radius < 0 for _, radius in balls):
            raise InvalidArgumentError("ball radii must be nonnegative")
        if l1_size + sum(size for size, _ in balls) != E.shape[1]:
            raise InvalidArgumentError(
                f"block sizes {l1_size} + {[s for s, _ in balls]} do not add up to {E.shape[1]} columns")
        self.E = E
        self.b = b
        self.l1_size = int(l1_size)
        self.l1_weight = float(l1_weight)
        self.balls = balls

    def __str__(self) -> str:
        """Return a string representation of the ConicProgram."""
        return (f"ConicProgram(rows={self.E.shape[0]}, l1={self.l1_size}, "
                f"balls={[(s, round(r, 6)) for s, r in self.balls]})")

    def block_slices(self) -> List[slice]:
        """Column slices of the ball blocks."""
        slices, start = [], self.l1_size
        for size, _ in self.balls:
            slices.append(slice(start, start + size))
            start += size
        return slices


class AffineProjector:
    """Projection onto {x : A x = b} through a factorization of A Aᵀ."""

    def __init__(self, A: np.ndarray, b: np.ndarray):
        self.A = A
        self.b = b
        gram = A @ A.T
        self._cho = None
        self._pinv = None
        try:
            self._cho = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
            if not np.all(np.isfinite(self._cho[0])):
                raise np.linalg.LinAlgError("non-finite Cholesky factor")
        except np.linalg.LinAlgError:
            logger.info("[SOLVER] A Aᵀ is singular; using an eigen pseudo-inverse")
            self._cho = None
            evals, evecs = scipy.linalg.eigh(gram)
            keep = evals > 1e-12 * max(float(evals[-1]), 1e-300)
            self._pinv = (evecs[:, keep] / evals[keep]) @ evecs[:, keep].T
        self.base = A.T @ self.solve(b)
        mismatch = float(np.linalg.norm(A @ self.base - b))
        if mismatch > CONSISTENCY_RTOL * (1 + float(np.linalg.norm(b))):
            raise InfeasibleProblemError(f"equality constraints are inconsistent (residual {mismatch:.3e})")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """(A Aᵀ)⁻¹ rhs, or its pseudo-inverse counterpart."""
        if self._cho is not None:
            return scipy.linalg.cho_solve(self._cho, rhs, check_finite=False)
        return self._pinv @ rhs

    def project(self, v: np.ndarray) -> np.ndarray:
        return v - self.A.T @ self.solve(self.A @ v - self.b)


def operator_norm(A: np.ndarray, iterations: Optional[int] = None, seed: int = 0) -> float:
    """
    Estimate ‖A‖₂ by power iteration on AᵀA from a seeded start vector.

    Args:
        A: Matrix
        iterations: Number of iterations (config.POWER_ITERATIONS by default)
        seed: Seed of the start vector

    Returns:
        The estimate
    """
    iterations = config.POWER_ITERATIONS if iterations is None else iterations
    v = np.random.default_rng(seed).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(iterations):
        w = A.T @ (A @ v)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0:
            return 0.0
        v = w / norm_w
        estimate = math.sqrt(norm_w)
    return estimate


def _project_ball(v: np.ndarray, radius: float) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm <= radius:
        return v
    if radius == 0:
        return np.zeros_like(v)
    return v * (radius / norm)


def conic_solve(
    program: ConicProgram,
    feas_rtol: Optional[float] = None,
    gap_rtol: Optional[float] = None,
    max_iterations: Optional[int] = None,
    check_every: Optional[int] = None,
) -> RecoverySolution:
    """
    Solve a ConicProgram with over-relaxed ADMM.

    Stops when the ball violations of the returned iterate are at most
    feas_rtol·(1 + ρ_j)/2, the consensus residual is at most feas_rtol·(1 + ‖b‖)
    and the gap to the best dual bound is at most gap_rtol·(1 + |objective|).

    Args:
        program: The program
        feas_rtol: Relative feasibility tolerance (config.SOLVER_FEAS_RTOL)
        gap_rtol: Relative duality-gap tolerance (config.SOLVER_GAP_RTOL)
        max_iterations: Iteration cap (config.SOLVER_MAX_ITERATIONS)
        check_every: Iterations between convergence checks (config.SOLVER_CHECK_EVERY)

    Returns:
        RecoverySolution with x_hat = x₀, nu_hat = x₁ (empty when there are no
        balls) and every block in `blocks`. converged is False when the cap was
        reached first.
    """
    feas_rtol = config.SOLVER_FEAS_RTOL if feas_rtol is None else float(feas_rtol)
    gap_rtol = config.SOLVER_GAP_RTOL if gap_rtol is None else float(gap_rtol)
    max_iterations = config.SOLVER_MAX_ITERATIONS if max_iterations is None else int(max_iterations)
    check_every = config.SOLVER_CHECK_EVERY if check_every is None else max(1, int(check_every))

    E, b, N = program.E, program.b, program.l1_size
    slices = program.block_slices()
    radii = np.array([radius for _, radius in program.balls])

    col_norms = np.linalg.norm(E, axis=0)
    scale = np.ones(E.shape[1])
    nonzero = col_norms[:N] > 0
    scale[:N][nonzero] = 1.0 / col_norms[:N][nonzero]
    block_scale = np.ones(len(slices))
    for j, sl in enumerate(slices):
        peak = float(np.max(col_norms[sl])) if sl.stop > sl.start else 0.0
        if peak > 0:
            block_scale[j] = 1.0 / peak
            scale[sl] = block_scale[j]
    E_s = E * scale
    weights = program.l1_weight * scale[:N]
    radii_s = radii / block_scale if len(slices) else radii
    b_norm = float(np.linalg.norm(b))

    projector = AffineProjector(E_s, b)

    def prox(v: np.ndarray, pen: float) -> np.ndarray:
        out = v.copy()
        if N:
            out[:N] = np.sign(v[:N]) * np.maximum(np.abs(v[:N]) - weights / pen, 0.0)
        for j, sl in enumerate(slices):
            out[sl] = _project_ball(v[sl], radii_s[j])
        return out

    def dual_bound(u: np.ndarray, pen: float) -> Tuple[float, np.ndarray]:
        mu = -projector.solve(E_s @ (pen * u))
        v = E_s.T @ mu
        t = 1.0
        if N:
            mags = np.abs(v[:N])
            active = mags > 0
            if np.any(active & (weights == 0)):
                t = 0.0
            elif np.any(active):
                t = min(1.0, float(np.min(weights[active] / mags[active])))
        value = float(b @ mu) - sum(radii_s[j] * float(np.linalg.norm(v[sl])) for j, sl in enumerate(slices))
        return t * value, mu

    e_norm = operator_norm(E_s)
    w_scale = float(np.mean(weights)) if N and program.l1_weight > 0 else 1.0
    pen = float(np.clip(w_scale * e_norm / (1 + b_norm), *PENALTY_RANGE))
    logger.debug(f"[SOLVER] {program}: |E_s|~{e_norm:.4g}, initial penalty {pen:.3g}")

    x = np.zeros(E.shape[1])
    y = projector.base.copy()
    u = np.zeros(E.shape[1])
    best_bound = -math.inf
    mu_prev: Optional[np.ndarray] = None
    certificate_streak = 0
    converged = False
    objective = math.inf
    iteration = 0
    violations: List[float] = []

    for iteration in range(1, max_iterations + 1):
        x = prox(y - u, pen)
        x_hat = OVER_RELAXATION * x + (1 - OVER_RELAXATION) * y
        y_old = y
        y = projector.project(x_hat + u)
        u = u + x_hat - y

        if iteration % check_every and iteration != max_iterations:
            continue

        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(u))):
            logger.error(f"[SOLVER] iterates diverged at iteration {iteration}")
            raise NumericalError(f"solver iterates became non-finite at iteration {iteration}")

        r_primal = float(np.linalg.norm(x - y))
        r_dual = pen * float(np.linalg.norm(y - y_old))
        objective = float(np.sum(weights * np.abs(y[:N])))
        violations = [float(np.linalg.norm(y[sl])) * block_scale[j] - radii[j] for j, sl in enumerate(slices)]
        bound, mu = dual_bound(u, pen)
        best_bound = max(best_bound, bound)

        feasible = r_primal <= feas_rtol * (1 + b_norm) and all(
            violations[j] <= BALL_MARGIN * feas_rtol * (1 + radii[j]) for j in range(len(slices)))
        if feasible and objective - best_bound <= gap_rtol * (1 + abs(objective)):
            converged = True
            break

        if mu_prev is not None:
            d = mu - mu_prev
            d_norm = float(np.linalg.norm(d))
            if d_norm > CERTIFICATE_MARGIN * (1 + float(np.linalg.norm(mu_prev))):
                v = E_s.T @ d
                orthogonal = N == 0 or float(np.max(np.abs(v[:N]))) <= CERTIFICATE_ORTHOGONALITY * d_norm
                value = float(b @ d) - sum(radii_s[j] * float(np.linalg.norm(v[sl])) for j, sl in enumerate(slices))
                if orthogonal and value > CERTIFICATE_MARGIN * d_norm * (1 + b_norm):
                    certificate_streak += 1
                else:
                    certificate_streak = 0
            else:
                certificate_streak = 0
            if certificate_streak >= CERTIFICATE_CHECKS:
                logger.warning(f"[SOLVER] infeasibility certificate at iteration {iteration}")
                raise InfeasibleProblemError(f"{program} is infeasible (certificate at iteration {iteration})")
        mu_prev = mu

        if iteration <= max_iterations // 2:
            if r_primal > RESIDUAL_GAP * r_dual and pen < PENALTY_RANGE[1]:
                pen *= PENALTY_FACTOR
                u /= PENALTY_FACTOR
            elif r_dual > RESIDUAL_GAP * r_primal and pen > PENALTY_RANGE[0]:
                pen /= PENALTY_FACTOR
                u *= PENALTY_FACTOR

    if not converged:
        logger.warning(f"[SOLVER] {program} not converged after {iteration} iterations "
                       f"(objective {objective:.6g}, bound {best_bound:.6g})")
    else:
        logger.debug(f"[SOLVER] converged in {iteration} iterations, objective {objective:.6g}")

    solution = scale * y
    blocks = [solution[sl] for sl in slices]
    residuals = {f"ball_{j + 1}": violations[j] for j in range(len(violations))}
    residuals['equality'] = float(np.linalg.norm(E @ solution - b)) - feas_rtol * (1 + b_norm)
    return RecoverySolution(
        x_hat=solution[:N],
        nu_hat=blocks[0] if blocks else np.zeros(0),
        objective=program.l1_weight * float(np.sum(np.abs(solution[:N]))),
        feas_residuals=residuals,
        iterations=iteration,
        converged=converged,
        dual_bound=best_bound,
        blocks=blocks,
    )
