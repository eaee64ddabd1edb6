"""
Exception hierarchy for qcslab.

Library code raises these; the CLI handlers catch QcslabError, log it and turn
it into a JSON error body with a non-zero exit status.
"""
from typing import Optional


class QcslabError(Exception):
    """Base class for all qcslab errors."""


class InvalidArgumentError(QcslabError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(InvalidArgumentError):
    """Malformed environment value or experiment configuration."""


class PayloadError(InvalidArgumentError):
    """A binary container or encoded payload could not be decoded."""


class ComputationError(QcslabError):
    """A numerical routine failed its own post-condition check."""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class NumericalError(ComputationError):
    """Iterates became NaN or infinite."""


class InfeasibleProblemError(QcslabError):
    """The solver found a certificate that the constraints cannot be met."""


class RankError(QcslabError):
    """A least-squares system is rank deficient."""


class DegenerateColumnError(QcslabError):
    """A column vanished after row restriction."""


class UnsupportedOperationError(QcslabError):
    """The requested fast path does not apply to these parameters."""


class BudgetExceededError(QcslabError):
    """A brute-force routine would exceed its work budget."""


class TheoremRangeError(QcslabError):
    """A sweep parameter lies outside the range covered by the guarantee."""
