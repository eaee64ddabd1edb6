"""
Sparse signal model for qcslab.
"""

from typing import Any, Dict

import numpy as np


class SparseSignal:
    """
    An ambient vector together with its support.

    Attributes:
        x: The n-dimensional signal
        support: Sorted indices of the nonzero entries
        k: Sparsity level the signal was drawn with
    """

    k: int = 0

    def __init__(self, x: np.ndarray, support: np.ndarray, k: int):
        self.x = x
        self.support = np.asarray(support, dtype=np.int64)
        self.k = int(k)

    def __str__(self) -> str:
        """Return a string representation of the SparseSignal."""
        return f"SparseSignal(n={self.n}, k={self.k}, support={self.support.tolist()})"

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    def best_k_term_error(self, k: int) -> float:
        from qcslab.services.signals import best_k_term_error
        return best_k_term_error(self.x, k)

    def to_dict(self) -> Dict[str, Any]:
        return {'n': self.n, 'k': self.k, 'support': self.support.tolist()}
