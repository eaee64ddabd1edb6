"""
Shared utility functions for qcslab.
"""

from qcslab.utils.metrics import Stopwatch, time_function
from qcslab.utils.numeric import (
    as_vector,
    is_prime,
    real_lift,
    require_positive_int,
    require_prime,
    stable_hash,
    to_jsonable,
)

__all__ = [
    "Stopwatch",
    "time_function",
    "as_vector",
    "is_prime",
    "real_lift",
    "require_positive_int",
    "require_prime",
    "stable_hash",
    "to_jsonable",
]
