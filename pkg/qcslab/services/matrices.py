"""
Measurement ensembles and analytic probes for qcslab.

This module provides the generators for every measurement ensemble (sub-Gaussian,
partial DFT/DCT/DST, chirp and its submatrix, U-modified and rotated matrices)
and the probes used to study them: incomplete Gauss sums, row-restricted
coherence, Monte-Carlo RIP proxies and the Weyl-type bound.

All matrices follow the unnormalized convention (squared column norm m in
expectation). Generators are pure functions of their dimensions and seed.
"""

import logging
import math
from typing import Any, Dict, Optional

import numpy as np
import scipy.fft
import scipy.linalg

from qcslab.errors import DegenerateColumnError, InvalidArgumentError
from qcslab.models.ensemble import CoherenceReport, MeasurementEnsemble
from qcslab.services.operators import dst3_matrix, orthogonal_factor
from qcslab.utils.numeric import require_positive_int, require_prime, stable_hash

logger = logging.getLogger(__name__)

GRAM_BLOCK = 512


def _check_shape(m: int, n: int) -> None:
    require_positive_int(m, "m")
    require_positive_int(n, "n")
    if m > n:
        raise InvalidArgumentError(f"m must not exceed n, got m={m}, n={n}")


def gen_subgaussian(m: int, n: int, seed: int, flavor: str = "gaussian") -> MeasurementEnsemble:
    """
    Standard normal or ±1 equiprobable entries.

    Args:
        m: Rows
        n: Columns, n ≥ m
        seed: Generator seed
        flavor: 'gaussian' or 'bernoulli'

    Returns:
        The ensemble
    """
    _check_shape(m, n)
    rng = np.random.default_rng(seed)
    if flavor == "gaussian":
        entries = rng.standard_normal((m, n))
    elif flavor == "bernoulli":
        entries = rng.choice(np.array([-1.0, 1.0]), size=(m, n))
    else:
        raise InvalidArgumentError(f"flavor must be 'gaussian' or 'bernoulli', got {flavor!r}")
    return MeasurementEnsemble(flavor, entries, seed=seed)


def _transform_matrix(n: int, transform: str) -> np.ndarray:
    if transform == "dct":
        return scipy.fft.dct(np.eye(n), type=2, norm="ortho", axis=0)
    if transform == "dst":
        return dst3_matrix(n)
    raise InvalidArgumentError(f"transform must be 'dft', 'dct' or 'dst', got {transform!r}")


def gen_partial_bos(m: int, n: int, seed: int, transform: str = "dft") -> MeasurementEnsemble:
    """
    m rows of the n×n DFT, DCT or DST, sampled uniformly without replacement.

    DFT entries are e^{2πi k j/n} (unit modulus); DCT and DST rows are the
    orthonormal transforms scaled by √n.

    Args:
        m: Rows kept
        n: Transform size
        seed: Row-sampling seed
        transform: 'dft', 'dct' or 'dst'

    Returns:
        The ensemble, with the sampled rows in metadata['rows']
    """
    _check_shape(m, n)
    rng = np.random.default_rng(seed)
    rows = np.sort(rng.permutation(n)[:m])
    if transform == "dft":
        entries = np.exp(2j * np.pi * np.outer(rows, np.arange(n)) / n)
    else:
        entries = math.sqrt(n) * _transform_matrix(n, transform)[rows]
    return MeasurementEnsemble(f"partial_{transform}", entries, seed=seed,
                               metadata={'rows': rows.tolist(), 'transform': transform})


def chirp_columns(p: int, r_params: np.ndarray, m_params: np.ndarray,
                  phases: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Chirp columns ω^{r x² + m x}, ω = e^{2πi/p}, evaluated at the given phases x.

    Exponents are reduced mod p in integer arithmetic before the exponential.
    """
    x = np.arange(p, dtype=np.int64) if phases is None else np.asarray(phases, dtype=np.int64)
    r_params = np.asarray(r_params, dtype=np.int64)
    m_params = np.asarray(m_params, dtype=np.int64)
    exponent = (np.outer(x * x % p, r_params) + np.outer(x, m_params)) % p
    return np.exp(2j * np.pi * exponent / p)


def gen_chirp(p: int) -> MeasurementEnsemble:
    """
    The p×p² chirp matrix; column r·p + m holds ω^{r x² + m x}, x = 0..p−1.

    Args:
        p: Prime

    Returns:
        The ensemble
    """
    p = require_prime(p)
    r_params = np.repeat(np.arange(p), p)
    m_params = np.tile(np.arange(p), p)
    entries = chirp_columns(p, r_params, m_params)
    return MeasurementEnsemble("chirp", entries, metadata={
        'p': p, 'r_params': r_params.tolist(), 'm_params': m_params.tolist()})


def gen_chirp_sub(p: int) -> MeasurementEnsemble:
    """
    The p × p⌊√p⌋ submatrix Φ̄ with m ∈ {s, 2s, …, s²}, s = ⌊√p⌋.

    Columns are r-major, then m ascending.

    Args:
        p: Prime

    Returns:
        The ensemble
    """
    p = require_prime(p)
    s = math.isqrt(p)
    r_params = np.repeat(np.arange(p), s)
    m_params = np.tile(s * np.arange(1, s + 1), p)
    entries = chirp_columns(p, r_params, m_params)
    logger.debug(f"[MATRIX] chirp_sub p={p}: {entries.shape[0]}x{entries.shape[1]}")
    return MeasurementEnsemble("chirp_sub", entries, metadata={
        'p': p, 'r_params': r_params.tolist(), 'm_params': m_params.tolist()})


def modify_with_U(base: MeasurementEnsemble, r: int, delta: float, eps: float = 0.0,
                  U: Optional[np.ndarray] = None) -> MeasurementEnsemble:
    """
    Form UΦ, with U the orthogonal SVD factor of H = [½ D^r | (ε/δ) I].

    Args:
        base: Inner ensemble Φ
        r: Σ∆ order
        delta: Quantizer step
        eps: Noise level
        U: Precomputed factor (optional)

    Returns:
        The 'modified' ensemble
    """
    if U is None:
        U = orthogonal_factor(base.m, r, float(delta), float(eps))
    if U.shape != (base.m, base.m):
        raise InvalidArgumentError(f"U must be {base.m}x{base.m}, got {U.shape}")
    return MeasurementEnsemble("modified", U @ base.entries, seed=base.seed, base=base,
                               metadata={'r': r, 'delta': delta, 'eps': eps})


def rotate(base: MeasurementEnsemble, Q: np.ndarray, label: str = "rotated") -> MeasurementEnsemble:
    """Form QΦ for an arbitrary m×m matrix Q."""
    if Q.shape != (base.m, base.m):
        raise InvalidArgumentError(f"Q must be {base.m}x{base.m}, got {Q.shape}")
    return MeasurementEnsemble("rotated", Q @ base.entries, seed=base.seed, base=base,
                               metadata={'label': label})


def gauss_sum(r_diff: int, m_diff: int, p: int, ell: int) -> complex:
    """
    Incomplete Gauss sum S(r, m, p, ℓ) = Σ_{x=1..ℓ} e^{2πi(r x² + m x)/p}.

    Args:
        r_diff: Quadratic coefficient
        m_diff: Linear coefficient
        p: Modulus
        ell: Number of terms, 1 ≤ ℓ ≤ p

    Returns:
        The sum, by direct summation
    """
    if isinstance(ell, bool) or int(ell) != ell or not 1 <= ell <= p:
        raise InvalidArgumentError(f"ell must lie in [1, {p}], got {ell}")
    x = np.arange(1, int(ell) + 1, dtype=np.int64)
    exponent = ((r_diff % p) * (x * x % p) + (m_diff % p) * x) % p
    return complex(np.sum(np.exp(2j * np.pi * exponent / p)))


def _normalized_restriction(A: MeasurementEnsemble, ell: int) -> np.ndarray:
    if isinstance(ell, bool) or int(ell) != ell or not 1 <= ell <= A.m:
        raise InvalidArgumentError(f"ell must lie in [1, {A.m}], got {ell}")
    R = A.entries[A.probe_rows(int(ell))]
    norms = np.linalg.norm(R, axis=0)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise DegenerateColumnError(f"column {int(zero[0])} vanishes on the first {ell} probe rows")
    return R / norms


def coherence(A: MeasurementEnsemble, ell: int) -> CoherenceReport:
    """
    Exact coherence of the unit-normalized ℓ-row restriction.

    The Gram matrix is formed in column blocks so memory stays bounded.

    Args:
        A: Ensemble
        ell: Probe rows

    Returns:
        CoherenceReport with the maximizing column pair
    """
    R = _normalized_restriction(A, ell)
    n = R.shape[1]
    best, pair = 0.0, (0, min(1, n - 1))
    for start in range(0, n, GRAM_BLOCK):
        stop = min(start + GRAM_BLOCK, n)
        G = np.abs(R[:, start:stop].conj().T @ R[:, start:])
        # keep only pairs (i, j) with j > i
        G[np.tril_indices(stop - start, 0, G.shape[1])] = -1.0
        flat = int(np.argmax(G))
        value = float(G.flat[flat])
        if value > best:
            i, j = np.unravel_index(flat, G.shape)
            best, pair = value, (start + int(i), start + int(j))
    mu = min(best, 1.0)
    logger.debug(f"[COHERENCE] {A}: mu={mu:.6g} at {pair}, ell={ell}")
    return CoherenceReport(mu, pair, int(ell))


def rip_proxy(A: MeasurementEnsemble, k: int, ell: int, trials: int, seed: int) -> Dict[str, float]:
    """
    Coherence bound kμ and a Monte-Carlo lower estimate of δ_k.

    The Monte-Carlo part scales the ℓ-row restriction by 1/√ℓ and takes the
    largest |σ² − 1| over `trials` random k-column subsets. Subset t is drawn
    from stable_hash(seed, t), so the result does not depend on evaluation order.

    Args:
        A: Ensemble
        k: Sparsity
        ell: Probe rows, 2k ≤ ℓ
        trials: Number of random subsets
        seed: Master seed

    Returns:
        {'k_mu_bound': ..., 'mc_delta': ...}
    """
    require_positive_int(k, "k")
    if 2 * k > ell:
        raise InvalidArgumentError(f"2k must not exceed ell, got k={k}, ell={ell}")
    k_mu_bound = k * coherence(A, ell).mu
    R = A.entries[A.probe_rows(int(ell))] / math.sqrt(ell)
    mc_delta = 0.0
    for t in range(trials):
        rng = np.random.default_rng(stable_hash(seed, t))
        subset = rng.choice(A.n, size=k, replace=False)
        sigma = scipy.linalg.svdvals(R[:, subset])
        mc_delta = max(mc_delta, float(np.max(np.abs(sigma ** 2 - 1))))
    return {'k_mu_bound': float(k_mu_bound), 'mc_delta': mc_delta}


def weyl_bound(r_diff: int, m_diff: int, p: int, ell: int) -> float:
    """
    Right-hand side of the Weyl-type bound on |S(r, m, p, ℓ)|.

    For r ≢ 0 (mod p): N/√q + √(N ln q) + √(q ln q) with q = p, N = ℓ.
    For r ≡ 0: 1/(2‖β‖) with β = m/p and ‖·‖ the distance to the nearest
    integer; infinite when ‖β‖ = 0.

    Args:
        r_diff: Quadratic coefficient
        m_diff: Linear coefficient
        p: Prime modulus
        ell: Number of terms

    Returns:
        The bound
    """
    if isinstance(ell, bool) or int(ell) != ell or not 1 <= ell <= p:
        raise InvalidArgumentError(f"ell must lie in [1, {p}], got {ell}")
    if r_diff % p != 0:
        q, N = p, ell
        return N / math.sqrt(q) + math.sqrt(N * math.log(q)) + math.sqrt(q * math.log(q))
    beta = (m_diff % p) / p
    distance = min(beta, 1 - beta)
    if distance == 0:
        logger.warning(f"[WEYL] columns coincide on the linear phase (m_diff={m_diff}, p={p}); bound is unbounded")
        return math.inf
    return 1 / (2 * distance)


def chirp_pair_witness(p: int, exponent: float = 0.9) -> Dict[str, Any]:
    """
    Gram of the first two normalized chirp columns on ⌊p^exponent⌋ rows.

    The first two columns are (r, m) = (0, 0) and (0, 1). The eigenvalues of
    their 2×2 Gram are 1 ± |g| with g the off-diagonal entry, so δ₂ = |g|.

    Args:
        p: Prime
        exponent: Row exponent

    Returns:
        Dict with 'gram', 'lambda_min', 'lambda_max', 'delta2' and 'ell'
    """
    p = require_prime(p)
    ell = max(1, math.floor(p ** exponent))
    cols = chirp_columns(p, np.array([0, 0]), np.array([0, 1]), phases=np.arange(1, ell + 1))
    cols = cols / np.linalg.norm(cols, axis=0)
    gram = cols.conj().T @ cols
    eig = np.linalg.eigvalsh(gram)
    return {
        'gram': gram,
        'lambda_min': float(eig[0]),
        'lambda_max': float(eig[-1]),
        'delta2': float(max(abs(eig[0] - 1), abs(eig[-1] - 1))),
        'ell': ell,
    }
