"""
Quantizer models for qcslab.

This module defines the midrise alphabet shared by MSQ and Σ∆ quantization,
the Σ∆ trace record, and the digital-buffer configuration.
"""

from typing import Any, Dict, Tuple

import numpy as np

from qcslab.errors import InvalidArgumentError


class MidriseAlphabet:
    """
    Levels {±(2j−1)δ/2 : j = 1..K}.

    Level indices run over 1..2K with value (2j − 2K − 1)δ/2, so index 1 is
    the most negative level and index 2K the most positive.

    Attributes:
        delta: Step δ > 0
        levels_per_side: K ≥ 1
    """

    delta: float = 0.1
    levels_per_side: int = 1

    def __init__(self, delta: float, levels_per_side: int):
        if not delta > 0:
            raise InvalidArgumentError(f"delta must be positive, got {delta}")
        if int(levels_per_side) != levels_per_side or levels_per_side < 1:
            raise InvalidArgumentError(f"levels_per_side must be a positive integer, got {levels_per_side}")
        self.delta = float(delta)
        self.levels_per_side = int(levels_per_side)

    def __str__(self) -> str:
        """Return a string representation of the MidriseAlphabet."""
        return f"MidriseAlphabet(delta={self.delta}, K={self.levels_per_side})"

    @property
    def size(self) -> int:
        return 2 * self.levels_per_side

    @property
    def max_level(self) -> float:
        return (2 * self.levels_per_side - 1) * self.delta / 2

    def levels(self) -> np.ndarray:
        j = np.arange(1, self.size + 1)
        return self.values(j)

    def indices(self, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Nearest level index for each entry, ties toward +∞.

        Returns:
            (indices in 1..2K, saturation mask where |y| > Kδ)
        """
        y = np.asarray(y, dtype=np.float64)
        K = self.levels_per_side
        raw = np.floor(y / self.delta) + K + 1
        idx = np.clip(raw, 1, 2 * K).astype(np.int64)
        saturated = np.abs(y) > K * self.delta
        return idx, saturated

    def values(self, indices: np.ndarray) -> np.ndarray:
        j = np.asarray(indices, dtype=np.float64)
        return (2 * j - 2 * self.levels_per_side - 1) * self.delta / 2

    def contains(self, q: np.ndarray, atol: float = 1e-12) -> bool:
        """True when every entry of q is a level of this alphabet."""
        idx, saturated = self.indices(q)
        return bool(not saturated.any() and np.allclose(self.values(idx), q, rtol=0, atol=atol))

    def to_dict(self) -> Dict[str, Any]:
        return {'delta': self.delta, 'K': self.levels_per_side}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MidriseAlphabet":
        return cls(data['delta'], data['K'])


class SigmaDeltaTrace:
    """
    Output of the greedy r-th order Σ∆ quantizer.

    Invariant: y − q = D^r u.

    Attributes:
        q: Quantized vector over the alphabet
        u: State sequence
        order: Order r
        overload_flag: True when ‖u‖_∞ exceeded δ/2
        saturated: True when some internal value fell outside [−Kδ, Kδ]
    """

    order: int = 1
    overload_flag: bool = False
    saturated: bool = False

    def __init__(self, q: np.ndarray, u: np.ndarray, order: int, alphabet: MidriseAlphabet,
                 overload_flag: bool = False, saturated: bool = False):
        self.q = q
        self.u = u
        self.order = int(order)
        self.alphabet = alphabet
        self.overload_flag = bool(overload_flag)
        self.saturated = bool(saturated)

    def __str__(self) -> str:
        """Return a string representation of the SigmaDeltaTrace."""
        return (f"SigmaDeltaTrace(m={self.q.shape[0]}, r={self.order}, "
                f"overload={self.overload_flag}, max|u|={float(np.max(np.abs(self.u))):.4g})")

    def level_indices(self) -> np.ndarray:
        idx, _ = self.alphabet.indices(self.q)
        return idx


class BufferConfig:
    """
    Parameters of the MSQ → U → Σ∆ digital-buffer pipeline.

    Attributes:
        delta: Σ∆ step δ
        r: Order
        m_max: Largest admissible measurement count
        eps: Measurement-noise bound ε
        delta_prime: MSQ step δ′ = δ(3πr)^r / m_max^r
        delta_dprime: δ″ = ε + δ′/2
    """

    delta: float = 0.1
    r: int = 1
    m_max: int = 1
    eps: float = 0.0

    def __init__(self, delta: float, r: int, m_max: int, eps: float = 0.0):
        if not delta > 0:
            raise InvalidArgumentError(f"delta must be positive, got {delta}")
        if r < 1 or m_max < 1:
            raise InvalidArgumentError(f"r and m_max must be ≥ 1, got r={r}, m_max={m_max}")
        if eps < 0:
            raise InvalidArgumentError(f"eps must be nonnegative, got {eps}")
        self.delta = float(delta)
        self.r = int(r)
        self.m_max = int(m_max)
        self.eps = float(eps)
        self.delta_prime = self.delta * (3 * np.pi * self.r) ** self.r / self.m_max ** self.r
        self.delta_dprime = self.eps + self.delta_prime / 2

    def __str__(self) -> str:
        """Return a string representation of the BufferConfig."""
        return (f"BufferConfig(delta={self.delta}, r={self.r}, m_max={self.m_max}, eps={self.eps}, "
                f"delta_prime={self.delta_prime:.6g}, delta_dprime={self.delta_dprime:.6g})")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'delta': self.delta,
            'r': self.r,
            'm_max': self.m_max,
            'eps': self.eps,
            'delta_prime': self.delta_prime,
            'delta_dprime': self.delta_dprime,
        }
