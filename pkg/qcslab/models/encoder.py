"""
Encoder model for qcslab.
"""

from typing import Any, Dict

import numpy as np

from qcslab.errors import InvalidArgumentError


class Encoder:
    """
    Bernoulli further-encoder E(q) = B D^{-r} q.

    Attributes:
        B: L×m matrix with ±1 entries
        L: Compressed dimension
        m: Input dimension
        r: Σ∆ order
        seed: Seed B was drawn from
    """

    L: int = 1
    m: int = 1
    r: int = 1
    seed: int = 0

    def __init__(self, B: np.ndarray, r: int, seed: int = 0):
        B = np.asarray(B, dtype=np.float64)
        if B.ndim != 2 or not np.all(np.abs(B) == 1):
            raise InvalidArgumentError("B must be a matrix with ±1 entries")
        if B.shape[0] > B.shape[1]:
            raise InvalidArgumentError(f"L must not exceed m, got L={B.shape[0]}, m={B.shape[1]}")
        if r < 1:
            raise InvalidArgumentError(f"r must be ≥ 1, got {r}")
        self.B = B
        self.L, self.m = B.shape
        self.r = int(r)
        self.seed = int(seed)

    def __str__(self) -> str:
        """Return a string representation of the Encoder."""
        return f"Encoder(L={self.L}, m={self.m}, r={self.r}, seed={self.seed})"

    def to_dict(self) -> Dict[str, Any]:
        return {'L': self.L, 'm': self.m, 'r': self.r, 'seed': self.seed}
