"""
Measurement ensemble models for qcslab.

This module defines MeasurementEnsemble, the dense measurement matrix together
with the recipe that produced it, and CoherenceReport, the result of the
row-restricted coherence probe.
"""

from typing import Any, Dict, Optional, Tuple

import numpy as np

ENSEMBLE_KINDS = (
    "gaussian",
    "bernoulli",
    "partial_dft",
    "partial_dct",
    "partial_dst",
    "chirp",
    "chirp_sub",
    "modified",
    "rotated",
)

CHIRP_KINDS = ("chirp", "chirp_sub")


class MeasurementEnsemble:
    """
    A real or complex m×n measurement matrix with its construction recipe.

    Entries follow the unnormalized convention: expected squared column norm m.

    Attributes:
        kind: Ensemble family, one of ENSEMBLE_KINDS
        m: Number of rows
        n: Number of columns
        seed: Seed the entries were generated from (0 for deterministic kinds)
        entries: Dense matrix
        base: Inner ensemble for kind 'modified' or 'rotated'
        metadata: Recipe details (sampled rows, chirp parameters, r, delta, eps)
    """

    kind: str = ""
    m: int = 0
    n: int = 0
    seed: int = 0

    def __init__(
        self,
        kind: str,
        entries: np.ndarray,
        seed: int = 0,
        base: Optional["MeasurementEnsemble"] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ):
        self.kind = kind
        self.entries = entries
        self.m, self.n = entries.shape
        self.seed = int(seed)
        self.base = base
        self.metadata = metadata or {}

    def __str__(self) -> str:
        """Return a string representation of the MeasurementEnsemble."""
        return f"MeasurementEnsemble(kind={self.kind}, m={self.m}, n={self.n}, seed={self.seed})"

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.entries))

    def probe_rows(self, ell: int) -> np.ndarray:
        """
        Row indices used by the ℓ-row coherence and RIP probes.

        Chirp-family matrices use phases x = 1..ℓ (row x mod p) so that
        restricted inner products are incomplete Gauss sums; other kinds use
        their leading ℓ rows.
        """
        if self.kind in CHIRP_KINDS:
            return np.arange(1, ell + 1) % self.m
        return np.arange(ell)

    def header(self) -> Dict[str, Any]:
        """Container header {kind, m, n, seed, complex_flag} plus recipe metadata."""
        return {
            'kind': self.kind,
            'm': self.m,
            'n': self.n,
            'seed': self.seed,
            'complex_flag': self.is_complex,
            'metadata': self.metadata,
        }


class CoherenceReport:
    """
    Coherence of the unit-normalized ℓ-row restriction of an ensemble.

    Attributes:
        mu: Maximum absolute inner product between distinct columns
        argpair: Column indices attaining mu
        ell: Number of rows used
    """

    mu: float = 0.0
    argpair: Tuple[int, int] = (0, 0)
    ell: int = 0

    def __init__(self, mu: float, argpair: Tuple[int, int], ell: int):
        self.mu = float(mu)
        self.argpair = (int(argpair[0]), int(argpair[1]))
        self.ell = int(ell)

    def __str__(self) -> str:
        """Return a string representation of the CoherenceReport."""
        return f"CoherenceReport(mu={self.mu:.6g}, argpair={self.argpair}, ell={self.ell})"

    def to_dict(self) -> Dict[str, Any]:
        return {'mu': self.mu, 'argpair': list(self.argpair), 'ell': self.ell}
