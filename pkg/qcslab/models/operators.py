"""
Operator models for qcslab.

This module defines the records produced by the operators service: the
difference operator D^r, the noise-shaping matrix H and its SVD factors.
"""

from typing import Any, Dict

import numpy as np

from qcslab.errors import InvalidArgumentError


class DifferenceOperator:
    """
    The r-th power of the m×m first-order difference matrix D.

    Attributes:
        order: Power r ≥ 1
        dim: Dimension m
    """

    order: int = 1
    dim: int = 1

    def __init__(self, order: int, dim: int):
        if order < 1 or dim < 1:
            raise InvalidArgumentError(f"order and dim must be ≥ 1, got r={order}, m={dim}")
        self.order = int(order)
        self.dim = int(dim)

    def __str__(self) -> str:
        """Return a string representation of the DifferenceOperator."""
        return f"DifferenceOperator(r={self.order}, m={self.dim})"

    def dense(self) -> np.ndarray:
        """Materialize D^r (tests and small problems only)."""
        from qcslab.services.operators import diff_matrix
        return diff_matrix(self.order, self.dim)

    def to_dict(self) -> Dict[str, Any]:
        return {'order': self.order, 'dim': self.dim}


class NoiseShapingMatrix:
    """
    H = [C_r D^r | (ε/δ) I_m], or C_r D^r alone when ε = 0.

    Attributes:
        cr: Stability constant C_r
        delta: Quantizer step δ
        eps: Noise level ε
        dim: Dimension m
        order: Order r
        H: The m×m or m×2m matrix
    """

    cr: float = 0.5
    delta: float = 0.1
    eps: float = 0.0
    dim: int = 1
    order: int = 1

    def __init__(self, cr: float, delta: float, eps: float, dim: int, order: int, H: np.ndarray):
        self.cr = float(cr)
        self.delta = float(delta)
        self.eps = float(eps)
        self.dim = int(dim)
        self.order = int(order)
        self.H = H

    def __str__(self) -> str:
        """Return a string representation of the NoiseShapingMatrix."""
        return (f"NoiseShapingMatrix(m={self.dim}, r={self.order}, cr={self.cr}, "
                f"delta={self.delta}, eps={self.eps}, shape={self.H.shape})")

    @property
    def key(self) -> tuple:
        """Hashable identity used by the factor cache."""
        return (self.dim, self.order, self.delta, self.eps, self.cr)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'cr': self.cr,
            'delta': self.delta,
            'eps': self.eps,
            'dim': self.dim,
            'order': self.order,
        }


class SvdFactors:
    """
    H = U diag(S) Vᵀ with S nonincreasing and canonical column signs.

    Attributes:
        U: m×m orthogonal factor
        S: Singular values, nonincreasing
        V: Right factor with orthonormal columns (one per singular value)
    """

    def __init__(self, U: np.ndarray, S: np.ndarray, V: np.ndarray):
        self.U = U
        self.S = S
        self.V = V

    def __str__(self) -> str:
        """Return a string representation of the SvdFactors."""
        return f"SvdFactors(m={self.U.shape[0]}, smax={self.S[0]:.6g}, smin={self.S[-1]:.6g})"

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.S) @ self.V.T
