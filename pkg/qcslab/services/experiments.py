"""
Experiment harness for qcslab.

This module provides the seeded trial loops behind every sweep (modified
measurement matrix, digital buffer, chirp p-sweep, chirp k-sweep and
distortion-rate), the log-log slope fit, the per-sweep summary and the
writers for trials.csv, timings.csv, summary.csv and meta.json.

Each trial derives its own seed from (master_seed, seed family, sweep value,
trial index), so results do not depend on the order in which trials run or
on how many worker processes run them.
"""

import csv
import json
import logging
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy

from qcslab import __version__
from qcslab.errors import (
    ComputationError,
    ConfigError,
    InfeasibleProblemError,
    InvalidArgumentError,
    RankError,
    TheoremRangeError,
)
from qcslab.models.ensemble import MeasurementEnsemble
from qcslab.models.experiment import ExperimentConfig, TrialRecord
from qcslab.models.problem import OneStageProblem
from qcslab.models.quantization import BufferConfig
from qcslab.models.signal import SparseSignal
from qcslab.services import recover
from qcslab.services.encode import (
    bits_required,
    direct_bits,
    encoder_rotation,
    make_encoder,
    norm_event_frequency,
    singular_value_event_frequency,
)
from qcslab.services.matrices import gen_chirp_sub, gen_partial_bos, gen_subgaussian, modify_with_U, rotate
from qcslab.services.operators import orthogonal_factor
from qcslab.services.quantize import buffer_pipeline, quantize_measurements
from qcslab.services.signals import best_k_term_error, generate_sparse_signal, measurement_noise
from qcslab.services.theory import (
    encoded_rows,
    encoded_sparsity_bound,
    k_sweep_bound,
    p_sweep_regime,
    theorem_log,
)
from qcslab.utils.metrics import Stopwatch, time_function
from qcslab.utils.numeric import stable_hash, to_jsonable

logger = logging.getLogger(__name__)

CHIRP_SUPPORT_POOL = 1400
MIN_FIT_POINTS = 3
SUMMARY_COLUMNS = ("experiment", "r", "sweep_value", "count", "failures", "mean_error", "sd_error",
                   "median_error", "slope_so_far", "log10_sweep", "log10_mean_error",
                   "reference_f", "reference_g")
TIMING_COLUMNS = ("experiment", "sweep_value", "trial", "r", "wall_time")

Table = Dict[str, Any]


# Slope fitting

def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> Dict[str, Any]:
    """
    Least-squares line through (log10 x, log10 y).

    Points with a nonpositive or non-finite coordinate are excluded with a
    warning.

    Args:
        x: Sweep values
        y: Mean errors

    Returns:
        Dict with 'slope', 'intercept', 'r2', 'points' and 'excluded'
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise InvalidArgumentError(f"x and y must have the same length, got {x.shape} and {y.shape}")
    keep = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    excluded = int(np.count_nonzero(~keep))
    if excluded:
        logger.warning(f"[FIT] excluded {excluded} nonpositive or non-finite points from the slope fit")
    if np.count_nonzero(keep) < MIN_FIT_POINTS:
        raise InvalidArgumentError(
            f"slope fit needs at least {MIN_FIT_POINTS} positive points, got {int(np.count_nonzero(keep))}")
    lx, ly = np.log10(x[keep]), np.log10(y[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum((ly - fitted) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    if ss_tot == 0:
        slope = 0.0
    return {
        'slope': float(slope),
        'intercept': float(intercept),
        'r2': r2,
        'points': int(np.count_nonzero(keep)),
        'excluded': excluded,
    }


# Trial building blocks

def _solver_options(cfg: ExperimentConfig) -> Dict[str, Any]:
    return {
        'feas_rtol': cfg.solver_feas_rtol,
        'gap_rtol': cfg.solver_gap_rtol,
        'max_iterations': cfg.solver_max_iterations,
    }


def trial_seed(cfg: ExperimentConfig, sweep_value: int, trial: int) -> int:
    return stable_hash(cfg.master_seed, cfg.seed_family, int(sweep_value), int(trial))


def _solve_and_score(problem: OneStageProblem, signal: SparseSignal,
                     options: Dict[str, Any]) -> Tuple[float, int, bool]:
    """Solve and return (error, iterations, converged); solver failures give a NaN error."""
    try:
        solution = recover.solve(problem, **options)
    except (ComputationError, InfeasibleProblemError) as e:
        logger.warning(f"[EXPERIMENT] solve failed: {e}")
        return float("nan"), 0, False
    return float(np.linalg.norm(signal.x - solution.x_hat)), solution.iterations, solution.converged


def _fourier_base(cfg: ExperimentConfig, m: int, seed: int) -> MeasurementEnsemble:
    if cfg.ensemble in ("gaussian", "bernoulli"):
        return gen_subgaussian(m, cfg.n, seed, cfg.ensemble)
    return gen_partial_bos(m, cfg.n, seed, cfg.ensemble.split("_", 1)[1])


@lru_cache(maxsize=4)
def _chirp_base(p: int, rows: int) -> MeasurementEnsemble:
    base = gen_chirp_sub(p)
    if rows == base.m:
        return base
    return MeasurementEnsemble(base.kind, base.entries[:rows], base=base,
                               metadata=dict(base.metadata, rows=rows))


@lru_cache(maxsize=8)
def _modified_chirp(p: int, r: int, delta: float, eps: float) -> MeasurementEnsemble:
    base = _chirp_base(p, p)
    return modify_with_U(base, r, delta, eps)


def _modified_pipeline(A: MeasurementEnsemble, signal: SparseSignal, eta: np.ndarray, r: int,
                       cfg: ExperimentConfig) -> Dict[str, Any]:
    """Measure with UΦ, Σ∆-quantize and solve the standard one-stage program."""
    y = A.entries @ signal.x + eta
    quantized = quantize_measurements(y, r, cfg.delta)
    problem = recover.build_standard_problem(A.entries, quantized['q'], r, cfg.delta, cfg.eps)
    error, iterations, converged = _solve_and_score(problem, signal, _solver_options(cfg))
    truth = {}
    if not quantized['overload']:
        truth = recover.check_feasible(problem, signal.x, eta)
    return {
        'q': quantized['q'],
        'error': error,
        'iterations': iterations,
        'converged': converged,
        'overload': quantized['overload'],
        'saturated': quantized['saturated'],
        'truth_violation': max(truth.values()) if truth else float("nan"),
    }


def _record(cfg: ExperimentConfig, sweep_value: int, trial: int, r: int, seed: int,
            signal: SparseSignal, outcome: Dict[str, Any], wall_time: float,
            extra: Optional[Dict[str, float]] = None) -> TrialRecord:
    return TrialRecord(cfg.experiment, sweep_value, trial, r, seed, outcome['error'],
                       sigma_k=best_k_term_error(signal.x, signal.k), iterations=outcome['iterations'],
                       converged=outcome['converged'], overload=outcome['overload'],
                       saturated=outcome['saturated'], wall_time=wall_time, extra=extra)


# Trials, one function per experiment

def _trial_fig_modified(cfg: ExperimentConfig, m: int, trial: int) -> List[TrialRecord]:
    seed = trial_seed(cfg, m, trial)
    rng = np.random.default_rng(seed)
    base = _fourier_base(cfg, m, stable_hash(seed, "matrix"))
    signal = generate_sparse_signal(cfg.n, cfg.k, rng, cfg.support_limit)
    eta = measurement_noise(m, cfg.eps, rng, base.is_complex)
    records = []
    for r in cfg.r_list:
        with Stopwatch() as watch:
            A = modify_with_U(base, r, cfg.delta, cfg.eps)
            outcome = _modified_pipeline(A, signal, eta, r, cfg)
            extra = {'truth_violation': outcome['truth_violation']}
            if cfg.baseline_two_stage:
                try:
                    x_two = recover.two_stage_decode(A.entries, outcome['q'], signal.support, r)
                    extra['two_stage_error'] = float(np.linalg.norm(signal.x - x_two))
                except (RankError, InvalidArgumentError) as e:
                    logger.warning(f"[EXPERIMENT] two-stage baseline skipped: {e}")
                    extra['two_stage_error'] = float("nan")
        records.append(_record(cfg, m, trial, r, seed, signal, outcome, watch.elapsed, extra))
    return records


def _trial_fig_buffer(cfg: ExperimentConfig, m: int, trial: int) -> List[TrialRecord]:
    seed = trial_seed(cfg, m, trial)
    rng = np.random.default_rng(seed)
    base = _fourier_base(cfg, m, stable_hash(seed, "matrix"))
    signal = generate_sparse_signal(cfg.n, cfg.k, rng, cfg.support_limit)
    eta = measurement_noise(m, cfg.eps, rng, base.is_complex)
    records = []
    for r in cfg.r_list:
        with Stopwatch() as watch:
            buffer_cfg = BufferConfig(cfg.delta, r, cfg.m_max, cfg.eps)
            U = orthogonal_factor(m, r, cfg.delta, buffer_cfg.delta_dprime)
            y = base.entries @ signal.x + eta
            buffered = buffer_pipeline(y, buffer_cfg, U)
            problem = recover.build_buffer_problem(U @ base.entries, buffered['q'], r, cfg.delta,
                                                   buffer_cfg.delta_dprime)
            error, iterations, converged = _solve_and_score(problem, signal, _solver_options(cfg))
            paired = _modified_pipeline(modify_with_U(base, r, cfg.delta, cfg.eps), signal, eta, r, cfg)
        outcome = {'error': error, 'iterations': iterations, 'converged': converged,
                   'overload': buffered['overload'], 'saturated': buffered['saturated']}
        ratio = error / paired['error'] if paired['error'] > 0 else float("nan")
        extra = {'modified_error': paired['error'], 'ratio_to_modified': ratio,
                 'delta_prime': buffer_cfg.delta_prime}
        records.append(_record(cfg, m, trial, r, seed, signal, outcome, watch.elapsed, extra))
    return records


def _trial_chirp(cfg: ExperimentConfig, p: int, k: int, sweep_value: int, trial: int) -> List[TrialRecord]:
    seed = trial_seed(cfg, sweep_value, trial)
    rng = np.random.default_rng(seed)
    n = p * math.isqrt(p)
    pool = min(cfg.support_limit or CHIRP_SUPPORT_POOL, n)
    signal = generate_sparse_signal(n, k, rng, pool)
    eta = measurement_noise(p, cfg.eps, rng, complex_valued=True)
    records = []
    for r in cfg.r_list:
        with Stopwatch() as watch:
            outcome = _modified_pipeline(_modified_chirp(p, r, cfg.delta, cfg.eps), signal, eta, r, cfg)
        extra = {'truth_violation': outcome['truth_violation']}
        if cfg.experiment == "fig_chirp_k_sweep":
            extra['k_prime'] = 1.0 / k
        records.append(_record(cfg, sweep_value, trial, r, seed, signal, outcome, watch.elapsed, extra))
    return records


def _trial_fig_chirp_p_sweep(cfg: ExperimentConfig, p: int, trial: int) -> List[TrialRecord]:
    return _trial_chirp(cfg, p, cfg.k, p, trial)


def _trial_fig_chirp_k_sweep(cfg: ExperimentConfig, k: int, trial: int) -> List[TrialRecord]:
    return _trial_chirp(cfg, cfg.p_list[0], k, k, trial)


def encoded_row_count(cfg: ExperimentConfig, p: int) -> int:
    """m = p, or ⌈p^{3/4}⌉ when encoded_rows is 'p34'."""
    if cfg.encoded_rows == "p34":
        return min(p, math.ceil(p ** 0.75))
    return p


def _trial_distortion_rate(cfg: ExperimentConfig, L: int, trial: int) -> List[TrialRecord]:
    p = cfg.p_list[0]
    m = encoded_row_count(cfg, p)
    seed = trial_seed(cfg, L, trial)
    rng = np.random.default_rng(seed)
    base = _chirp_base(p, m)
    signal = generate_sparse_signal(base.n, cfg.k, rng, min(cfg.support_limit or base.n, base.n))
    eta = measurement_noise(m, cfg.eps, rng, complex_valued=True)
    records = []
    for r in cfg.r_list:
        with Stopwatch() as watch:
            encoder = make_encoder(L, m, r, stable_hash(seed, "encoder", r))
            A = rotate(base, encoder_rotation(encoder), label="encoder")
            y = A.entries @ signal.x + eta
            quantized = quantize_measurements(y, r, cfg.delta)
            problem = recover.build_encoded_problem(A.entries, quantized['q'], encoder, cfg.delta, cfg.eps,
                                                    cfg.encoded_C)
            error, iterations, converged = _solve_and_score(problem, signal, _solver_options(cfg))
            K = quantized['alphabet'].levels_per_side
            extra = {
                'rate_bits': 2 * bits_required(L, m, r, K),
                'direct_bits': 2 * direct_bits(m, K),
                'K': K,
            }
            if L == m:
                unencoded = recover.build_standard_problem(A.entries, quantized['q'], r, cfg.delta, cfg.eps)
                extra['unencoded_error'] = _solve_and_score(unencoded, signal, _solver_options(cfg))[0]
        outcome = {'error': error, 'iterations': iterations, 'converged': converged,
                   'overload': quantized['overload'], 'saturated': quantized['saturated']}
        records.append(_record(cfg, L, trial, r, seed, signal, outcome, watch.elapsed, extra))
    return records


_TRIALS: Dict[str, Callable[[ExperimentConfig, int, int], List[TrialRecord]]] = {
    'fig_modified': _trial_fig_modified,
    'fig_buffer': _trial_fig_buffer,
    'fig_chirp_p_sweep': _trial_fig_chirp_p_sweep,
    'fig_chirp_k_sweep': _trial_fig_chirp_k_sweep,
    'distortion_rate': _trial_distortion_rate,
}


def _run_unit(unit: Tuple[Dict[str, Any], int, int]) -> List[TrialRecord]:
    """Worker entry point: one (sweep value, trial) for every r."""
    cfg_data, sweep_value, trial = unit
    cfg = ExperimentConfig.from_dict(cfg_data)
    return _TRIALS[cfg.experiment](cfg, sweep_value, trial)


def run_trials(cfg: ExperimentConfig, sweep_values: Sequence[int]) -> List[TrialRecord]:
    """
    Run every (sweep value, trial) unit, in a process pool when cfg.workers > 1.

    Returns:
        Records sorted by (r, sweep value, trial)
    """
    units = [(cfg.to_dict(), int(v), t) for v in sweep_values for t in range(cfg.trials)]
    logger.info(f"[EXPERIMENT] {cfg.experiment}: {len(units)} units on {cfg.workers} worker(s)")
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            batches = list(pool.map(_run_unit, units))
    else:
        batches = [_run_unit(unit) for unit in units]
    records = [record for batch in batches for record in batch]
    failures = sum(record.failed for record in records)
    if failures:
        logger.warning(f"[EXPERIMENT] {failures} of {len(records)} trials failed or did not converge")
    return sorted(records, key=lambda record: record.sort_key)


# Summaries

def _plot_abscissa(cfg: ExperimentConfig, sweep_value: int) -> float:
    """k-sweeps are plotted against k′ = 1/k, every other sweep against its value."""
    if cfg.experiment == "fig_chirp_k_sweep":
        return 1.0 / sweep_value
    return float(sweep_value)


def summarize(cfg: ExperimentConfig, records: List[TrialRecord]) -> Tuple[List[Dict[str, Any]], Dict[str, Any]]:
    """
    Per-(r, sweep value) statistics over the converged trials.

    Reference curves f = C·s^{-1/2} and g = D·s^{-3/2} (s the plotted
    abscissa) pass through the first sweep point's mean error.

    Returns:
        (rows, slopes) with slopes keyed by r
    """
    rows: List[Dict[str, Any]] = []
    slopes: Dict[str, Any] = {}
    for r in cfg.r_list:
        by_sweep: Dict[int, List[TrialRecord]] = {}
        for record in records:
            if record.r == r:
                by_sweep.setdefault(record.sweep_value, []).append(record)
        xs: List[float] = []
        means: List[float] = []
        anchor: Optional[Tuple[float, float]] = None
        for sweep_value in sorted(by_sweep):
            group = by_sweep[sweep_value]
            good = np.array([rec.error for rec in group if not rec.failed])
            mean = float(good.mean()) if good.size else float("nan")
            x = _plot_abscissa(cfg, sweep_value)
            xs.append(x)
            means.append(mean)
            if anchor is None and mean == mean:
                anchor = (x, mean)
            slope_so_far = float("nan")
            if len(xs) >= MIN_FIT_POINTS:
                try:
                    slope_so_far = fit_loglog_slope(xs, means)['slope']
                except InvalidArgumentError:
                    pass
            row = {
                'experiment': cfg.experiment,
                'r': r,
                'sweep_value': sweep_value,
                'count': len(group),
                'failures': len(group) - int(good.size),
                'mean_error': mean,
                'sd_error': float(good.std(ddof=1)) if good.size > 1 else 0.0,
                'median_error': float(np.median(good)) if good.size else float("nan"),
                'slope_so_far': slope_so_far,
                'log10_sweep': math.log10(x),
                'log10_mean_error': math.log10(mean) if mean > 0 else float("nan"),
                'reference_f': anchor[1] * (x / anchor[0]) ** -0.5 if anchor else float("nan"),
                'reference_g': anchor[1] * (x / anchor[0]) ** -1.5 if anchor else float("nan"),
            }
            row.update(_summary_extras(cfg, group))
            rows.append(row)
        try:
            slopes[str(r)] = fit_loglog_slope(xs, means)
        except InvalidArgumentError as e:
            logger.warning(f"[EXPERIMENT] no slope for r={r}: {e}")
            slopes[str(r)] = None
    return rows, slopes


def _summary_extras(cfg: ExperimentConfig, group: List[TrialRecord]) -> Dict[str, Any]:
    good = [rec for rec in group if not rec.failed]
    if cfg.experiment == "fig_buffer":
        ratios = [rec.extra['ratio_to_modified'] for rec in good if rec.extra['ratio_to_modified'] == rec.extra['ratio_to_modified']]
        return {'median_ratio_to_modified': float(np.median(ratios)) if ratios else float("nan")}
    if cfg.experiment == "fig_chirp_k_sweep":
        return {'k_prime': 1.0 / group[0].sweep_value}
    if cfg.experiment == "distortion_rate":
        p = cfg.p_list[0]
        rate = max(rec.extra['rate_bits'] for rec in group)
        unencoded = [rec.extra['unencoded_error'] for rec in group if 'unencoded_error' in rec.extra]
        return {
            'rate_bits': rate,
            'direct_bits': max(rec.extra['direct_bits'] for rec in group),
            'rate_normalized': rate / (max(cfg.k, 1) * theorem_log(p, cfg.log_base)),
            'distortion': max(rec.error for rec in good) if good else float("nan"),
            'median_unencoded_error': float(np.nanmedian(unencoded)) if unencoded else float("nan"),
        }
    return {}


def _distortion_exponents(cfg: ExperimentConfig, rows: List[Dict[str, Any]]) -> Dict[str, Any]:
    """Slope of log₂ D against R/(k log p), per r, over sweep points with D > 0."""
    exponents: Dict[str, Any] = {}
    for r in cfg.r_list:
        points = [(row['rate_normalized'], row['distortion']) for row in rows
                  if row['r'] == r and row['distortion'] > 0]
        excluded = sum(1 for row in rows if row['r'] == r) - len(points)
        if excluded:
            logger.warning(f"[EXPERIMENT] {excluded} sweep points without positive distortion excluded for r={r}")
        if len(points) < MIN_FIT_POINTS:
            exponents[str(r)] = None
            continue
        rate, distortion = np.array(points).T
        slope, intercept = np.polyfit(rate, np.log2(distortion), 1)
        exponents[str(r)] = {'slope': float(slope), 'intercept': float(intercept), 'points': len(points)}
    return exponents


# Experiments

def _table(cfg: ExperimentConfig, records: List[TrialRecord], meta: Dict[str, Any]) -> Table:
    rows, slopes = summarize(cfg, records)
    meta['slopes'] = slopes
    return {'records': records, 'summary': rows, 'meta': meta}


def run_fig_modified(cfg: ExperimentConfig) -> Table:
    """Error versus m for UΦ-modified measurements and one-stage recovery."""
    records = run_trials(cfg, cfg.m_list)
    return _table(cfg, records, {'ensemble': cfg.ensemble})


def run_fig_buffer(cfg: ExperimentConfig) -> Table:
    """Error versus m for the digital-buffer pipeline, paired with the modified pipeline."""
    records = run_trials(cfg, cfg.m_list)
    delta_prime = {str(r): BufferConfig(cfg.delta, r, cfg.m_max, cfg.eps).delta_prime for r in cfg.r_list}
    delta_dprime = {str(r): BufferConfig(cfg.delta, r, cfg.m_max, cfg.eps).delta_dprime for r in cfg.r_list}
    logger.info(f"[EXPERIMENT] fig_buffer delta_prime={delta_prime}")
    return _table(cfg, records, {'ensemble': cfg.ensemble, 'm_max': cfg.m_max,
                                 'delta_prime': delta_prime, 'delta_dprime': delta_dprime})


def run_fig_chirp_p_sweep(cfg: ExperimentConfig) -> Table:
    """Error versus p for U·Φ̄ with supports inside a fixed coordinate pool."""
    p1 = cfg.p_list[0]
    regime = {str(p): p_sweep_regime(cfg.k, p, p1, cfg.theorem_alpha, cfg.theorem_beta) for p in cfg.p_list}
    for p, flags in regime.items():
        if not (flags['k_within'] and flags['p_within']):
            logger.info(f"[EXPERIMENT] p={p} lies outside the growing-p regime: {flags}")
    records = run_trials(cfg, cfg.p_list)
    notes = []
    if not cfg.paper_scale:
        notes.append("desk-scale prime list; --paper-scale runs the full-size list")
    return _table(cfg, records, {'regime': regime, 'support_pool': cfg.support_limit or CHIRP_SUPPORT_POOL,
                                 'ambient_dimension': {str(p): p * math.isqrt(p) for p in cfg.p_list},
                                 'notes': notes})


def run_fig_chirp_k_sweep(cfg: ExperimentConfig) -> Table:
    """
    Error versus k′ = 1/k at a fixed prime.

    Raises:
        TheoremRangeError: A k exceeds ⌊√p / log p⌋ and cfg.force is not set
    """
    p = cfg.p_list[0]
    if len(cfg.p_list) > 1:
        logger.warning(f"[EXPERIMENT] k-sweep uses p={p}; remaining primes {cfg.p_list[1:]} ignored")
    bound = k_sweep_bound(p, cfg.log_base)
    beyond = [k for k in cfg.k_list if k > bound]
    if beyond and not cfg.force:
        raise TheoremRangeError(f"k values {beyond} exceed the fixed-p range k ≤ {bound} at p={p}; use --force")
    if beyond:
        logger.warning(f"[EXPERIMENT] running k values {beyond} beyond k ≤ {bound} (forced)")
    n = p * math.isqrt(p)
    pool = min(cfg.support_limit or CHIRP_SUPPORT_POOL, n)
    records = run_trials(cfg, cfg.k_list)
    notes = [f"supports drawn from the first {pool} of {n} coordinates"]
    if pool != n:
        notes.append(f"support pool {pool} differs from the ambient dimension {n}")
    return _table(cfg, records, {'p': p, 'k_bound': bound, 'beyond_bound': beyond, 'forced': bool(beyond),
                                 'support_pool': pool, 'ambient_dimension': n, 'notes': notes})


def distortion_lengths(cfg: ExperimentConfig, m: int) -> List[int]:
    """Configured L values, or the single default ⌊p^{5/8} log² p⌋ capped at m."""
    if cfg.l_list is None:
        return [encoded_rows(cfg.p_list[0], m, cfg.log_base)[0]]
    too_long = [L for L in cfg.l_list if L > m]
    if too_long:
        raise ConfigError(f"l_list entries {too_long} exceed the {m} encoded rows")
    return list(cfg.l_list)


def run_distortion_rate(cfg: ExperimentConfig) -> Table:
    """Rate and empirical distortion of the encoded pipeline over the L sweep."""
    p = cfg.p_list[0]
    m = encoded_row_count(cfg, p)
    lengths = distortion_lengths(cfg, m)
    bound = encoded_sparsity_bound(p, cfg.log_base)
    if cfg.k > bound:
        logger.warning(f"[EXPERIMENT] k={cfg.k} exceeds the encoded-pipeline range k ≤ {bound} at p={p}")
    records = run_trials(cfg, lengths)
    table = _table(cfg, records, {'p': p, 'm': m, 'encoded_rows': cfg.encoded_rows, 'k_bound': bound,
                                  'encoded_C': cfg.encoded_C if cfg.encoded_C is not None else cfg.delta / 2,
                                  'notes': ["distortion is the maximum error over the converged trials"]})
    table['meta']['distortion_rate_exponent'] = _distortion_exponents(cfg, table['summary'])
    r = cfg.r_list[0]
    table['meta']['encoder_events'] = {
        str(L): {
            'norm_bound_frequency': norm_event_frequency(L, m, cfg.trials, stable_hash(cfg.master_seed, "norm", L)),
            'singular_value_frequency': singular_value_event_frequency(
                L, m, r, cfg.trials, stable_hash(cfg.master_seed, "sigma", L)),
        }
        for L in lengths
    }
    return table


_RUNNERS: Dict[str, Callable[[ExperimentConfig], Table]] = {
    'fig_modified': run_fig_modified,
    'fig_buffer': run_fig_buffer,
    'fig_chirp_p_sweep': run_fig_chirp_p_sweep,
    'fig_chirp_k_sweep': run_fig_chirp_k_sweep,
    'distortion_rate': run_distortion_rate,
}


# Output

def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _write_csv(path: Path, columns: Sequence[str], rows: List[Dict[str, Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[c]) if c in row else "" for c in columns])


def trial_columns(records: List[TrialRecord]) -> List[str]:
    extras = sorted({key for record in records for key in record.extra})
    return list(TrialRecord.BASE_COLUMNS) + extras


def write_outputs(cfg: ExperimentConfig, table: Table, out_dir: Path, wall_time: float) -> Dict[str, str]:
    """
    Write trials.csv, timings.csv, summary.csv and meta.json.

    trials.csv and summary.csv hold no timing data, so they are identical
    across runs of the same configuration.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    records = table['records']
    paths = {name: out_dir / name for name in ("trials.csv", "timings.csv", "summary.csv", "meta.json")}

    trial_rows = []
    for record in records:
        row = {name: getattr(record, name) for name in TrialRecord.BASE_COLUMNS}
        row.update(record.extra)
        trial_rows.append(row)
    _write_csv(paths["trials.csv"], trial_columns(records), trial_rows)
    _write_csv(paths["timings.csv"], TIMING_COLUMNS, [
        {'experiment': rec.experiment, 'sweep_value': rec.sweep_value, 'trial': rec.trial, 'r': rec.r,
         'wall_time': rec.wall_time} for rec in records])

    summary = table['summary']
    extra_columns = sorted({key for row in summary for key in row} - set(SUMMARY_COLUMNS))
    _write_csv(paths["summary.csv"], list(SUMMARY_COLUMNS) + extra_columns, summary)

    meta = dict(table['meta'])
    meta.update({
        'config': cfg.to_dict(),
        'versions': {'qcslab': __version__, 'numpy': np.__version__, 'scipy': scipy.__version__,
                     'python': platform.python_version()},
        'trial_count': len(records),
        'failures': sum(record.failed for record in records),
        'wall_time_seconds': wall_time,
    })
    with open(paths["meta.json"], "w", encoding="utf-8") as handle:
        json.dump(to_jsonable(meta), handle, indent=2, sort_keys=True)
    logger.info(f"[EXPERIMENT] wrote {len(records)} trials to {out_dir}")
    return {name: str(path) for name, path in paths.items()}


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[Path] = None) -> Table:
    """
    Run the configured experiment and optionally write its outputs.

    Args:
        cfg: Validated configuration
        out_dir: Output directory; nothing is written when None

    Returns:
        The table, with 'paths' set when outputs were written
    """
    logger.info(f"[EXPERIMENT] starting {cfg}")
    table, wall_time = time_function(_RUNNERS[cfg.experiment])(cfg)
    table['wall_time'] = wall_time
    if out_dir is not None:
        table['paths'] = write_outputs(cfg, table, Path(out_dir), wall_time)
    logger.info(f"[EXPERIMENT] {cfg.experiment} finished in {wall_time:.1f}s")
    return table
