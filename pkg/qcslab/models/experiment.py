"""
Experiment models for qcslab.

This module defines ExperimentConfig, the declarative description of a sweep
read from a JSON file, and TrialRecord, one row of trials.csv.
"""

import copy
from typing import Any, Dict, List, Optional

from qcslab import config
from qcslab.errors import ConfigError
from qcslab.utils.numeric import is_prime

EXPERIMENTS = (
    "fig_modified",
    "fig_buffer",
    "fig_chirp_p_sweep",
    "fig_chirp_k_sweep",
    "distortion_rate",
)

FOURIER_ENSEMBLES = ("partial_dft", "partial_dct", "partial_dst", "gaussian", "bernoulli")

_COMMON_DEFAULTS: Dict[str, Any] = {
    'n': None,
    'k': 5,
    'delta': 0.1,
    'r_list': [1, 2],
    'm_list': None,
    'p_list': None,
    'k_list': None,
    'l_list': None,
    'trials': 20,
    'master_seed': 20240101,
    'eps': 0.0,
    'm_max': None,
    'log_base': 'e',
    'solver_feas_rtol': None,
    'solver_gap_rtol': None,
    'solver_max_iterations': None,
    'ensemble': 'partial_dft',
    'support_limit': None,
    'paper_scale': False,
    'force': False,
    'workers': None,
    'baseline_two_stage': False,
    'encoded_C': None,
    'encoded_rows': 'p',
    'theorem_alpha': 0.34,
    'theorem_beta': 0.3,
}

# Desk-scale defaults; the full-size profile overrides a few of them
_EXPERIMENT_DEFAULTS: Dict[str, Dict[str, Any]] = {
    'fig_modified': {'n': 200, 'k': 5, 'm_list': [20, 30, 40, 50, 60, 70]},
    'fig_buffer': {'n': 200, 'k': 5, 'm_list': [20, 30, 40, 50, 60, 70]},
    'fig_chirp_p_sweep': {'k': 4, 'p_list': [61, 137, 223, 307], 'support_limit': 427},
    'fig_chirp_k_sweep': {'p_list': [61], 'k_list': [2, 3, 4, 5, 6], 'trials': 50, 'support_limit': 1400},
    'distortion_rate': {'k': 2, 'r_list': [2], 'p_list': [61], 'l_list': [12, 20, 30, 40, 50, 61]},
}

_PAPER_SCALE: Dict[str, Dict[str, Any]] = {
    'fig_chirp_p_sweep': {'p_list': [61, 137, 223, 307, 397, 487, 593, 677, 787]},
    'fig_chirp_k_sweep': {'p_list': [541], 'k_list': list(range(3, 16))},
    'distortion_rate': {'p_list': [541], 'l_list': [40, 80, 160, 320, 541]},
}


class ExperimentConfig:
    """
    Declarative sweep description.

    Unknown keys are rejected; missing keys take the experiment's desk-scale
    default. With paper_scale set, the full-size sweep lists replace whatever
    the fields give for them.
    """

    FIELDS = tuple(_COMMON_DEFAULTS.keys()) + ('experiment',)

    experiment: str = ""
    n: Optional[int] = None
    k: int = 5
    delta: float = 0.1
    r_list: List[int] = []
    m_list: Optional[List[int]] = None
    p_list: Optional[List[int]] = None
    k_list: Optional[List[int]] = None
    l_list: Optional[List[int]] = None
    trials: int = 20
    master_seed: int = 0
    eps: float = 0.0
    m_max: Optional[int] = None
    log_base: Any = 'e'
    solver_feas_rtol: float = 0.0
    solver_gap_rtol: float = 0.0
    solver_max_iterations: int = 0
    ensemble: str = 'partial_dft'
    support_limit: Optional[int] = None
    paper_scale: bool = False
    force: bool = False
    workers: int = 1
    baseline_two_stage: bool = False
    encoded_C: Optional[float] = None
    encoded_rows: str = 'p'
    theorem_alpha: float = 0.34
    theorem_beta: float = 0.3

    def __init__(self, experiment: str, **fields: Any):
        """
        Initialize an ExperimentConfig.

        Args:
            experiment: One of EXPERIMENTS
            **fields: Any subset of FIELDS; the rest take defaults
        """
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
        unknown = sorted(set(fields) - set(self.FIELDS))
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        self.experiment = experiment
        paper_scale = bool(fields.get('paper_scale', False))
        values = copy.deepcopy(_COMMON_DEFAULTS)
        values.update(copy.deepcopy(_EXPERIMENT_DEFAULTS[experiment]))
        values.update(fields)
        # The full-size sweep lists win over the desk lists a config file carries
        if paper_scale:
            values.update(copy.deepcopy(_PAPER_SCALE.get(experiment, {})))
        if values['solver_feas_rtol'] is None:
            values['solver_feas_rtol'] = config.SOLVER_FEAS_RTOL
        if values['solver_gap_rtol'] is None:
            values['solver_gap_rtol'] = config.SOLVER_GAP_RTOL
        if values['solver_max_iterations'] is None:
            values['solver_max_iterations'] = config.SOLVER_MAX_ITERATIONS
        if values['workers'] is None:
            values['workers'] = config.WORKERS
        if experiment == 'fig_buffer' and values['m_max'] is None:
            values['m_max'] = max(values['m_list'])
        for name, value in values.items():
            setattr(self, name, value)
        self.validate()

    def __str__(self) -> str:
        """Return a string representation of the ExperimentConfig."""
        return (f"ExperimentConfig(experiment={self.experiment}, sweep={self.sweep_values}, "
                f"r_list={self.r_list}, trials={self.trials}, master_seed={self.master_seed})")

    @property
    def sweep_name(self) -> str:
        return {
            'fig_modified': 'm',
            'fig_buffer': 'm',
            'fig_chirp_p_sweep': 'p',
            'fig_chirp_k_sweep': 'k',
            'distortion_rate': 'L',
        }[self.experiment]

    @property
    def sweep_values(self) -> List[int]:
        return list({
            'm': self.m_list,
            'p': self.p_list,
            'k': self.k_list,
            'L': self.l_list,
        }[self.sweep_name] or [])

    @property
    def seed_family(self) -> str:
        """Experiments compared on matched seeds share a family."""
        if self.experiment in ('fig_modified', 'fig_buffer'):
            return 'partial_fourier'
        return self.experiment

    def validate(self) -> None:
        """Check every field against the chosen experiment; raise ConfigError on the first problem."""
        def positive_ints(name: str, values: Any) -> None:
            if not isinstance(values, list) or not values:
                raise ConfigError(f"{name} must be a non-empty list")
            for v in values:
                if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                    raise ConfigError(f"{name} entries must be positive integers, got {v!r}")

        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be ≥ 1, got {self.trials!r}")
        if not isinstance(self.k, int) or self.k < 0:
            raise ConfigError(f"k must be a nonnegative integer, got {self.k!r}")
        if not isinstance(self.delta, (int, float)) or not self.delta > 0:
            raise ConfigError(f"delta must be positive, got {self.delta!r}")
        if not isinstance(self.eps, (int, float)) or self.eps < 0:
            raise ConfigError(f"eps must be nonnegative, got {self.eps!r}")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise ConfigError(f"master_seed must be a nonnegative integer, got {self.master_seed!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError(f"workers must be ≥ 1, got {self.workers!r}")
        positive_ints('r_list', self.r_list)
        config.parse_log_base(self.log_base)
        if self.encoded_rows not in ('p', 'p34'):
            raise ConfigError(f"encoded_rows must be 'p' or 'p34', got {self.encoded_rows!r}")
        if self.encoded_C is not None and not self.encoded_C > 0:
            raise ConfigError(f"encoded_C must be positive, got {self.encoded_C!r}")

        if self.experiment in ('fig_modified', 'fig_buffer'):
            positive_ints('m_list', self.m_list)
            if not isinstance(self.n, int) or self.n < 1:
                raise ConfigError(f"n must be a positive integer, got {self.n!r}")
            if max(self.m_list) > self.n:
                raise ConfigError(f"m_list entries must not exceed n={self.n}")
            if self.k > self.n:
                raise ConfigError(f"k={self.k} exceeds n={self.n}")
            if self.ensemble not in FOURIER_ENSEMBLES:
                raise ConfigError(f"ensemble must be one of {FOURIER_ENSEMBLES}, got {self.ensemble!r}")
            if self.experiment == 'fig_buffer' and max(self.m_list) > self.m_max:
                raise ConfigError(f"m_list entries must not exceed m_max={self.m_max}")
        else:
            positive_ints('p_list', self.p_list)
            for p in self.p_list:
                if not is_prime(p):
                    raise ConfigError(f"p_list entries must be prime, got {p}")
        if self.experiment == 'fig_chirp_k_sweep':
            positive_ints('k_list', self.k_list)
        if self.experiment == 'distortion_rate' and self.l_list is not None:
            positive_ints('l_list', self.l_list)
        if self.support_limit is not None and (not isinstance(self.support_limit, int) or self.support_limit < 1):
            raise ConfigError(f"support_limit must be a positive integer, got {self.support_limit!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in ('experiment',) + tuple(_COMMON_DEFAULTS.keys())}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], **overrides: Any) -> "ExperimentConfig":
        """
        Create an ExperimentConfig from a parsed JSON document.

        Args:
            data: The JSON object; must contain 'experiment'
            **overrides: Values that win over the document (CLI flags)

        Returns:
            A validated ExperimentConfig
        """
        if not isinstance(data, dict) or 'experiment' not in data:
            raise ConfigError("config must be a JSON object with an 'experiment' key")
        fields = {k: v for k, v in data.items() if k != 'experiment'}
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return cls(data['experiment'], **fields)


class TrialRecord:
    """
    One trial of one sweep point.

    Attributes:
        experiment: Experiment id
        sweep_value: m, p, k or L
        trial: Trial index
        r: Σ∆ order
        seed: Trial sub-seed
        error: ‖x − x̂‖₂ (NaN when the solve failed)
        sigma_k: Best k-term ℓ1 error of the signal
        iterations: Solver iterations
        converged: Solver convergence flag
        overload: Σ∆ overload flag
        saturated: Quantizer saturation flag
        wall_time: Seconds spent (written to timings.csv only)
        extra: Experiment-specific numeric columns
    """

    BASE_COLUMNS = ("experiment", "sweep_value", "trial", "r", "seed", "error", "sigma_k",
                    "iterations", "converged", "overload", "saturated")

    def __init__(self, experiment: str, sweep_value: int, trial: int, r: int, seed: int,
                 error: float, sigma_k: float = 0.0, iterations: int = 0, converged: bool = True,
                 overload: bool = False, saturated: bool = False, wall_time: float = 0.0,
                 extra: Optional[Dict[str, float]] = None):
        self.experiment = experiment
        self.sweep_value = int(sweep_value)
        self.trial = int(trial)
        self.r = int(r)
        self.seed = int(seed)
        self.error = float(error)
        self.sigma_k = float(sigma_k)
        self.iterations = int(iterations)
        self.converged = bool(converged)
        self.overload = bool(overload)
        self.saturated = bool(saturated)
        self.wall_time = float(wall_time)
        self.extra = dict(extra or {})

    def __str__(self) -> str:
        """Return a string representation of the TrialRecord."""
        return (f"TrialRecord({self.experiment}, sweep={self.sweep_value}, trial={self.trial}, "
                f"r={self.r}, error={self.error:.4g}, converged={self.converged})")

    @property
    def sort_key(self) -> tuple:
        return (self.r, self.sweep_value, self.trial)

    @property
    def failed(self) -> bool:
        return not self.converged or self.error != self.error

    def to_dict(self) -> Dict[str, Any]:
        data = {name: getattr(self, name) for name in self.BASE_COLUMNS}
        data.update(self.extra)
        data['wall_time'] = self.wall_time
        return data
