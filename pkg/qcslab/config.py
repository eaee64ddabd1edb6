"""
Configuration settings for qcslab.

Values are read from the environment (optionally populated from a .env file)
once at import time. Experiment sweeps are configured separately through JSON
files, see qcslab.models.experiment.ExperimentConfig.
"""
import math
import os
from typing import Union

from dotenv import load_dotenv

from qcslab.errors import ConfigError

# Load environment variables from .env file
load_dotenv()


def _env_number(name: str, default: str, kind: type = float) -> Union[int, float]:
    """
    Read a numeric environment variable.

    Args:
        name: Environment variable name
        default: Value used when the variable is unset
        kind: int or float

    Returns:
        The parsed value
    """
    raw = os.getenv(name, default)
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a {kind.__name__}, got {raw!r}")


def parse_log_base(raw: Union[str, float, int]) -> float:
    """
    Parse a logarithm base, accepting 'e' for the natural logarithm.

    Args:
        raw: 'e', a number, or a numeric string

    Returns:
        The base as a float
    """
    if isinstance(raw, str) and raw.strip().lower() == "e":
        return math.e
    try:
        base = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"log base must be 'e' or a number, got {raw!r}")
    if base <= 0 or base == 1:
        raise ConfigError(f"log base must be positive and different from 1, got {base}")
    return base


# Logging settings
LOG_LEVEL = os.getenv('QCSLAB_LOG_LEVEL', 'INFO').upper()
LOG_FORMAT = '%(asctime)s [%(levelname)s] %(name)s - %(message)s'

# Quantizer settings
DEFAULT_CR = 0.5  # greedy Sigma-Delta stability constant

# Solver settings
SOLVER_MAX_ITERATIONS = int(_env_number('QCSLAB_SOLVER_MAX_ITERATIONS', '50000', int))
SOLVER_FEAS_RTOL = float(_env_number('QCSLAB_SOLVER_FEAS_RTOL', '1e-6'))
SOLVER_GAP_RTOL = float(_env_number('QCSLAB_SOLVER_GAP_RTOL', '1e-5'))
SOLVER_CHECK_EVERY = int(_env_number('QCSLAB_SOLVER_CHECK_EVERY', '10', int))
POWER_ITERATIONS = int(_env_number('QCSLAB_POWER_ITERATIONS', '100', int))

# Theorem-derived formulas use this logarithm base
LOG_BASE = parse_log_base(os.getenv('QCSLAB_LOG_BASE', 'e'))

# Experiment settings
WORKERS = int(_env_number('QCSLAB_WORKERS', '1', int))

# Oracle budgets (test surface only)
ORACLE_MAX_N = 24
ORACLE_MAX_K = 3
ORACLE_MAX_SUPPORTS = 100000
