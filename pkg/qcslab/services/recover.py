"""
One-stage recovery programs for qcslab.

This module builds and solves the three one-stage ℓ1 programs (standard,
digital-buffer and encoded) on top of the shared conic solver, audits
feasibility of candidate points, and implements the two-stage least-squares
decoder used as a baseline.

Complex measurements are lifted to reals by stacking [Re; Im]; D^{-r} and the
encoder act on each channel separately.
"""

import logging
import math
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from qcslab import config
from qcslab.config import DEFAULT_CR
from qcslab.errors import InvalidArgumentError, RankError
from qcslab.models.encoder import Encoder
from qcslab.models.problem import OneStageProblem, RecoverySolution
from qcslab.services.conic_solver import ConicProgram, conic_solve
from qcslab.services.operators import apply_diff_inv, diff_inv_matrix, diff_matrix
from qcslab.utils.numeric import real_lift

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-12


def lift(phi: np.ndarray, q: np.ndarray) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Real-lift a measurement system.

    Returns:
        (phi_eff, q_eff, channels) with channels = 2 when either input is complex
    """
    phi = np.asarray(phi)
    q = np.asarray(q).ravel()
    if phi.shape[0] != q.shape[0]:
        raise InvalidArgumentError(f"phi has {phi.shape[0]} rows but q has {q.shape[0]} entries")
    if np.iscomplexobj(phi) or np.iscomplexobj(q):
        return real_lift(phi), real_lift(q), 2
    return phi.astype(np.float64), q.astype(np.float64), 1


def diff_inv_channels(r: int, v: np.ndarray, channels: int) -> np.ndarray:
    """Apply D^{-r} to each channel of a lifted vector (or matrix with lifted rows)."""
    if channels == 1:
        return apply_diff_inv(r, v)
    parts = np.split(np.asarray(v), channels, axis=0)
    return np.concatenate([apply_diff_inv(r, part) for part in parts], axis=0)


def _per_channel(block: np.ndarray, channels: int) -> np.ndarray:
    return scipy.linalg.block_diag(*([block] * channels))


def build_standard_problem(phi: np.ndarray, q: np.ndarray, r: int, delta: float, eps: float = 0.0,
                           cr: float = DEFAULT_CR) -> OneStageProblem:
    """
    The one-stage program for UΦ-modified (or plain) measurements.

    tau1 = C_r δ √M and tau2 = ε √M, M = m or 2m after lifting.
    """
    phi_eff, q_eff, channels = lift(phi, q)
    M = phi_eff.shape[0]
    return OneStageProblem(phi_eff, q_eff, r, cr * delta * math.sqrt(M), eps * math.sqrt(M),
                           variant="standard", channels=channels)


def build_buffer_problem(phi_modified: np.ndarray, q: np.ndarray, r: int, delta: float,
                         delta_dprime: float, cr: float = DEFAULT_CR) -> OneStageProblem:
    """
    The digital-buffer program: as the standard one with tau2 = δ″ √M.

    Args:
        phi_modified: UΦ
        q: Σ∆ output of the buffer pipeline
        r: Order
        delta: Σ∆ step
        delta_dprime: δ″ = ε + δ′/2
        cr: Stability constant
    """
    phi_eff, q_eff, channels = lift(phi_modified, q)
    M = phi_eff.shape[0]
    return OneStageProblem(phi_eff, q_eff, r, cr * delta * math.sqrt(M), delta_dprime * math.sqrt(M),
                           variant="buffer", channels=channels)


def build_encoded_problem(phi: np.ndarray, q: np.ndarray, encoder: Encoder, delta: float,
                          eps: float = 0.0, C: Optional[float] = None) -> OneStageProblem:
    """
    The encoded program: ‖Bũ‖₂ ≤ 3·C·m·√channels and ‖ẽ‖₂ ≤ √M ε.

    Args:
        phi: Measurement matrix Φ (m rows)
        q: Σ∆ output
        encoder: Encoder holding B
        delta: Σ∆ step
        eps: Noise level
        C: Constant of the ũ bound; defaults to C_r δ = δ/2
    """
    phi_eff, q_eff, channels = lift(phi, q)
    if encoder.m != phi_eff.shape[0] // channels:
        raise InvalidArgumentError(f"encoder expects m={encoder.m}, measurements have {phi_eff.shape[0] // channels}")
    C = DEFAULT_CR * delta if C is None else float(C)
    M = phi_eff.shape[0]
    return OneStageProblem(phi_eff, q_eff, encoder.r, 3 * C * encoder.m * math.sqrt(channels),
                           eps * math.sqrt(M), variant="encoded", channels=channels, B=encoder.B)


def check_feasible(problem: OneStageProblem, z: np.ndarray, nu: np.ndarray,
                   u: Optional[np.ndarray] = None) -> Dict[str, float]:
    """
    Constraint violations of a candidate point (≤ 0 means satisfied).

    Standard/buffer: {'residual': ‖D^{-r}(Φz+ν−q)‖ − tau1, 'noise': ‖ν‖ − tau2}.
    Encoded (u required): {'equality': ‖BD^{-r}(Φz+ν−q) − Bu‖, 'encoded_state': ‖Bu‖ − tau1,
    'noise': ‖ν‖ − tau2}.
    """
    z = np.asarray(z, dtype=np.float64).ravel()
    nu = real_lift(np.asarray(nu)) if np.iscomplexobj(nu) else np.asarray(nu, dtype=np.float64).ravel()
    inner = problem.phi_eff @ z + nu - problem.q_eff
    shaped = diff_inv_channels(problem.r, inner, problem.channels)
    result = {'noise': float(np.linalg.norm(nu)) - problem.tau2}
    if problem.variant != "encoded":
        result['residual'] = float(np.linalg.norm(shaped)) - problem.tau1
        return result
    if u is None:
        raise InvalidArgumentError("encoded feasibility needs the state u")
    u = real_lift(np.asarray(u)) if np.iscomplexobj(u) else np.asarray(u, dtype=np.float64).ravel()
    B_lift = _per_channel(problem.B, problem.channels)
    Bu = B_lift @ u
    result['equality'] = float(np.linalg.norm(B_lift @ shaped - Bu))
    result['encoded_state'] = float(np.linalg.norm(Bu)) - problem.tau1
    return result


def _solver_options(options: Dict[str, Any]) -> Dict[str, Any]:
    allowed = ('feas_rtol', 'gap_rtol', 'max_iterations', 'check_every')
    unknown = set(options) - set(allowed)
    if unknown:
        raise InvalidArgumentError(f"unknown solver options: {sorted(unknown)}")
    return options


def solve_one_stage(problem: OneStageProblem, **solver_options: Any) -> RecoverySolution:
    """
    min ‖z‖₁  s.t.  ‖D^{-r}(Φz + ν − q)‖₂ ≤ tau1,  ‖ν‖₂ ≤ tau2.

    Solved in the equivalent form Φz + ν − D^r w = q with ‖w‖₂ ≤ tau1; the
    reported residuals are recomputed through D^{-r}. A solve whose recomputed
    residuals exceed tolerance is reported as not converged.

    Args:
        problem: A standard or buffer OneStageProblem
        **solver_options: feas_rtol, gap_rtol, max_iterations, check_every

    Returns:
        RecoverySolution
    """
    if problem.variant not in ("standard", "buffer"):
        raise InvalidArgumentError(f"solve_one_stage handles standard and buffer problems, got {problem.variant}")
    options = _solver_options(solver_options)
    M, N = problem.M, problem.N
    D_lift = _per_channel(diff_matrix(problem.r, problem.m), problem.channels)
    E = np.hstack([problem.phi_eff, np.eye(M), -D_lift])
    program = ConicProgram(E, problem.q_eff, N, 1.0, [(M, problem.tau2), (M, problem.tau1)])
    logger.debug(f"[RECOVER] solving {problem}")
    raw = conic_solve(program, **options)

    z, nu = raw.x_hat, raw.blocks[0]
    residuals = check_feasible(problem, z, nu)
    feas_rtol = options.get('feas_rtol') or config.SOLVER_FEAS_RTOL
    converged = raw.converged
    limits = {'residual': problem.tau1, 'noise': problem.tau2}
    for name, radius in limits.items():
        if residuals[name] > feas_rtol * (1 + radius):
            if converged:
                logger.warning(f"[RECOVER] {name} violation {residuals[name]:.3e} after solve; marking unconverged")
            converged = False
    return RecoverySolution(z, nu, float(np.sum(np.abs(z))), residuals, raw.iterations, converged,
                            dual_bound=raw.dual_bound, blocks=raw.blocks)


def encoded_row_factor(B: np.ndarray, r: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Thin SVD B D^{-r} = P diag(sigma) Qᵀ of the encoded constraint rows.

    Returns:
        (P, sigma, Qt) with P (L×L) orthogonal and Qt (L×m) orthonormal rows

    Raises:
        RankError: when B D^{-r} is not of full row rank
    """
    K = B @ diff_inv_matrix(r, B.shape[1])
    P, sigma, Qt = scipy.linalg.svd(K, full_matrices=False)
    if sigma[-1] <= RANK_RTOL * sigma[0]:
        raise RankError(f"B D^-r is rank deficient (sigma_min/sigma_max = {sigma[-1] / sigma[0]:.3e})")
    return P, sigma, Qt


def solve_encoded(problem: OneStageProblem, **solver_options: Any) -> RecoverySolution:
    """
    min ‖z‖₁  s.t.  BD^{-r}(Φz + e) − g = BD^{-r}q,  ‖g‖₂ ≤ tau1,  ‖e‖₂ ≤ tau2.

    g stands for Bũ. With BD^{-r} = P Σ Qᵀ the equality is solved as
    Qᵀ(Φz + e) − Σ⁻¹h = Qᵀq with g = P h, so the rows handed to the solver
    are orthonormal and ‖h‖₂ = ‖g‖₂. ũ is recovered afterwards as the
    minimum-norm solution of Bũ = g on each channel.

    Args:
        problem: An encoded OneStageProblem
        **solver_options: feas_rtol, gap_rtol, max_iterations, check_every

    Returns:
        RecoverySolution with u_hat set
    """
    if problem.variant != "encoded":
        raise InvalidArgumentError(f"solve_encoded handles encoded problems, got {problem.variant}")
    options = _solver_options(solver_options)
    M, N, ch = problem.M, problem.N, problem.channels
    B = problem.B
    P, sigma, Qt = encoded_row_factor(B, problem.r)
    Qt_lift = _per_channel(Qt, ch)
    L_eff = Qt_lift.shape[0]
    E = np.hstack([Qt_lift @ problem.phi_eff, Qt_lift, -np.diag(np.tile(1.0 / sigma, ch))])
    program = ConicProgram(E, Qt_lift @ problem.q_eff, N, 1.0, [(M, problem.tau2), (L_eff, problem.tau1)])
    logger.debug(f"[RECOVER] solving {problem} (row condition {sigma[0] / sigma[-1]:.3g})")
    raw = conic_solve(program, **options)

    z, e = raw.x_hat, raw.blocks[0]
    g = _per_channel(P, ch) @ raw.blocks[1]
    u_parts = [scipy.linalg.lstsq(B, part)[0] for part in np.split(g, ch)]
    u_hat = np.concatenate(u_parts)
    residuals = check_feasible(problem, z, e, u_hat)
    rhs_norm = float(np.linalg.norm(_per_channel(B @ diff_inv_matrix(problem.r, problem.m), ch) @ problem.q_eff))
    residuals['equality'] -= problem.tol_eq * (1 + rhs_norm)
    feas_rtol = options.get('feas_rtol') or config.SOLVER_FEAS_RTOL
    converged = raw.converged
    if residuals['equality'] > 0 or residuals['noise'] > feas_rtol * (1 + problem.tau2) \
            or residuals['encoded_state'] > feas_rtol * (1 + problem.tau1):
        if converged:
            logger.warning(f"[RECOVER] encoded constraints violated after solve: {residuals}")
        converged = False
    return RecoverySolution(z, e, float(np.sum(np.abs(z))), residuals, raw.iterations, converged,
                            dual_bound=raw.dual_bound, u_hat=u_hat, blocks=[e, g])


def solve(problem: OneStageProblem, **solver_options: Any) -> RecoverySolution:
    """Dispatch on problem.variant."""
    if problem.variant == "encoded":
        return solve_encoded(problem, **solver_options)
    return solve_one_stage(problem, **solver_options)


def two_stage_decode(phi: np.ndarray, q: np.ndarray, support: Sequence[int], r: int) -> np.ndarray:
    """
    Support-based decoder x̂ = (D^{-r}Φ_T)† D^{-r} q.

    Args:
        phi: Measurement matrix (real or complex)
        q: Quantized measurements
        support: Index set T
        r: Σ∆ order

    Returns:
        Real n-vector supported on T
    """
    phi_eff, q_eff, channels = lift(phi, q)
    T = np.asarray(sorted(set(int(t) for t in support)), dtype=np.int64)
    x_hat = np.zeros(phi_eff.shape[1])
    if T.size == 0:
        return x_hat
    if T.size > phi_eff.shape[0]:
        raise InvalidArgumentError(f"|T|={T.size} exceeds the number of measurements {phi_eff.shape[0]}")
    A = diff_inv_channels(r, phi_eff[:, T], channels)
    if np.linalg.matrix_rank(A) < T.size:
        raise RankError(f"D^-r Phi_T is rank deficient for |T|={T.size}")
    coef, *_ = scipy.linalg.lstsq(A, diff_inv_channels(r, q_eff, channels))
    x_hat[T] = coef
    return x_hat
