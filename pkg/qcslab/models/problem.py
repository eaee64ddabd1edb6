"""
Recovery problem models for qcslab.

This module defines OneStageProblem, the real-lifted data of one of the three
one-stage programs, and RecoverySolution, the solver output with diagnostics.
"""

from typing import Any, Dict, List, Optional

import numpy as np

from qcslab.errors import InvalidArgumentError

VARIANTS = ("standard", "buffer", "encoded")


class OneStageProblem:
    """
    Data of a one-stage ℓ1 program.

    Standard and buffer variants:
        min ‖z‖₁  s.t.  ‖D^{-r}(Φz + ν − q)‖₂ ≤ tau1,  ‖ν‖₂ ≤ tau2
    Encoded variant:
        min ‖z‖₁  s.t.  BD^{-r}(Φz + e) − Bu = BD^{-r}q,  ‖Bu‖₂ ≤ tau1,  ‖e‖₂ ≤ tau2

    Complex measurements are stored lifted, [Re; Im], and D^{-r} (and B) act
    per channel.

    Attributes:
        phi_eff: Real M×N effective matrix
        q_eff: Real M-vector of quantized measurements
        r: Σ∆ order
        tau1: Residual radius
        tau2: Noise radius
        variant: 'standard', 'buffer' or 'encoded'
        channels: 1 for real measurements, 2 for lifted complex ones
        B: L×m ±1 encoder matrix (encoded variant only)
        tol_eq: Relative tolerance on the encoded equality constraint
    """

    r: int = 1
    tau1: float = 0.0
    tau2: float = 0.0
    variant: str = "standard"
    channels: int = 1
    tol_eq: float = 1e-6

    def __init__(
        self,
        phi_eff: np.ndarray,
        q_eff: np.ndarray,
        r: int,
        tau1: float,
        tau2: float,
        variant: str = "standard",
        channels: int = 1,
        B: Optional[np.ndarray] = None,
        tol_eq: float = 1e-6,
    ):
        if variant not in VARIANTS:
            raise InvalidArgumentError(f"variant must be one of {VARIANTS}, got {variant!r}")
        phi_eff = np.asarray(phi_eff, dtype=np.float64)
        q_eff = np.asarray(q_eff, dtype=np.float64).ravel()
        if phi_eff.ndim != 2 or phi_eff.shape[0] != q_eff.shape[0]:
            raise InvalidArgumentError(
                f"phi_eff rows must match q_eff length, got {phi_eff.shape} and {q_eff.shape}")
        if phi_eff.shape[0] % channels != 0:
            raise InvalidArgumentError(f"{phi_eff.shape[0]} rows cannot be split into {channels} channels")
        if not np.all(np.isfinite(phi_eff)) or not np.all(np.isfinite(q_eff)):
            raise InvalidArgumentError("phi_eff and q_eff must be finite")
        if r < 1:
            raise InvalidArgumentError(f"r must be ≥ 1, got {r}")
        if tau1 < 0 or tau2 < 0:
            raise InvalidArgumentError(f"radii must be nonnegative, got tau1={tau1}, tau2={tau2}")
        if variant == "encoded":
            if B is None:
                raise InvalidArgumentError("encoded problems need the encoder matrix B")
            if not np.all(np.abs(B) == 1):
                raise InvalidArgumentError("B must have ±1 entries")
            if B.shape[1] != phi_eff.shape[0] // channels:
                raise InvalidArgumentError(f"B has {B.shape[1]} columns, expected {phi_eff.shape[0] // channels}")
        self.phi_eff = phi_eff
        self.q_eff = q_eff
        self.r = int(r)
        self.tau1 = float(tau1)
        self.tau2 = float(tau2)
        self.variant = variant
        self.channels = int(channels)
        self.B = None if B is None else np.asarray(B, dtype=np.float64)
        self.tol_eq = float(tol_eq)

    def __str__(self) -> str:
        """Return a string representation of the OneStageProblem."""
        return (f"OneStageProblem(variant={self.variant}, M={self.M}, N={self.N}, r={self.r}, "
                f"tau1={self.tau1:.6g}, tau2={self.tau2:.6g}, channels={self.channels})")

    @property
    def M(self) -> int:
        return int(self.phi_eff.shape[0])

    @property
    def N(self) -> int:
        return int(self.phi_eff.shape[1])

    @property
    def m(self) -> int:
        """Measurements per channel."""
        return self.M // self.channels

    def header(self) -> Dict[str, Any]:
        return {
            'variant': self.variant,
            'r': self.r,
            'tau1': self.tau1,
            'tau2': self.tau2,
            'channels': self.channels,
            'tol_eq': self.tol_eq,
        }


class RecoverySolution:
    """
    Output of a one-stage solve.

    Attributes:
        x_hat: Recovered N-vector
        nu_hat: Recovered noise variable (ν, or ẽ for the encoded variant)
        objective: ‖x̂‖₁
        feas_residuals: Constraint name → violation (≤ 0 means satisfied)
        iterations: Solver iterations used
        converged: Whether the stopping test passed before the iteration cap
        dual_bound: Best lower bound on the optimal value found
        u_hat: Recovered ũ (encoded variant only)
        blocks: Every variable block of the underlying conic program
    """

    objective: float = 0.0
    iterations: int = 0
    converged: bool = False
    dual_bound: float = float("-inf")

    def __init__(
        self,
        x_hat: np.ndarray,
        nu_hat: np.ndarray,
        objective: float,
        feas_residuals: Dict[str, float],
        iterations: int,
        converged: bool,
        dual_bound: float = float("-inf"),
        u_hat: Optional[np.ndarray] = None,
        blocks: Optional[List[np.ndarray]] = None,
    ):
        self.x_hat = x_hat
        self.nu_hat = nu_hat
        self.objective = float(objective)
        self.feas_residuals = feas_residuals
        self.iterations = int(iterations)
        self.converged = bool(converged)
        self.dual_bound = float(dual_bound)
        self.u_hat = u_hat
        self.blocks = blocks or []

    def __str__(self) -> str:
        """Return a string representation of the RecoverySolution."""
        return (f"RecoverySolution(objective={self.objective:.6g}, iterations={self.iterations}, "
                f"converged={self.converged})")

    @property
    def max_violation(self) -> float:
        if not self.feas_residuals:
            return 0.0
        return max(self.feas_residuals.values())

    def to_dict(self) -> Dict[str, Any]:
        """Summary without the vectors."""
        return {
            'objective': self.objective,
            'iterations': self.iterations,
            'converged': self.converged,
            'dual_bound': self.dual_bound,
            'feas_residuals': dict(self.feas_residuals),
        }
