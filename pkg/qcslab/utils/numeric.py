"""
Shared numeric utility functions for qcslab.

This module provides helpers used across services: JSON conversion of numpy
values, stable seed derivation, primality testing and argument checks.
"""

import hashlib
import logging
from typing import Any, Iterable

import numpy as np

from qcslab.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

# Deterministic Miller-Rabin witnesses, sufficient for every n < 3.3e24
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def to_jsonable(obj: Any) -> Any:
    """
    Recursively convert numpy scalars and arrays to plain Python values.

    Args:
        obj: The object to convert

    Returns:
        The object with numpy values replaced by ints, floats and lists
    """
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [[float(v.real), float(v.imag)] for v in obj.ravel()]
        return obj.tolist()
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif isinstance(obj, np.bool_):
        return bool(obj)
    elif isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [to_jsonable(item) for item in obj]
    return obj


def stable_hash(*parts: Any) -> int:
    """
    Derive a 63-bit seed from an ordered sequence of values.

    The value depends only on the repr of each part, never on process state,
    so it is identical across runs, platforms and worker processes.

    Args:
        *parts: Values identifying the random stream

    Returns:
        A non-negative integer usable as a numpy seed
    """
    digest = hashlib.sha256("|".join(repr(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def is_prime(n: int) -> bool:
    """
    Deterministic Miller-Rabin primality test.

    Args:
        n: Integer to test

    Returns:
        True if n is prime
    """
    if n < 2:
        return False
    for small in _MR_WITNESSES:
        if n % small == 0:
            return n == small
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def require_prime(p: int) -> int:
    """Return p as int, raising InvalidArgumentError unless it is prime."""
    if int(p) != p or not is_prime(int(p)):
        raise InvalidArgumentError(f"p must be prime, got {p}")
    return int(p)


def require_positive_int(value: Any, name: str) -> int:
    """Return value as int, raising InvalidArgumentError unless it is a positive integer."""
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise InvalidArgumentError(f"{name} must be a positive integer, got {value}")
    return int(value)


def as_vector(v: Iterable, name: str = "v") -> np.ndarray:
    """
    Convert input to a non-empty numpy array, keeping complex dtype when present.

    Args:
        v: Array-like input (1-D vector or 2-D matrix whose columns are vectors)
        name: Name used in error messages

    Returns:
        A float64 or complex128 array
    """
    arr = np.asarray(v)
    if arr.size == 0:
        raise InvalidArgumentError(f"{name} must be non-empty")
    if np.iscomplexobj(arr):
        return arr.astype(np.complex128)
    return arr.astype(np.float64)


def real_lift(a: np.ndarray) -> np.ndarray:
    """Stack real and imaginary parts along the first axis ([Re; Im])."""
    return np.concatenate([np.real(a), np.imag(a)], axis=0)
