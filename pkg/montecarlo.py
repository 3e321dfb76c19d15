"""
Monte-Carlo validation of the Weibull criterion formulas
Progressively censored samples, maximum likelihood fits and empirical
checks of E[X_{m:m:n}] and of the delta-method Var[ln X_s]
"""
import math
from dataclasses import dataclass
from multiprocessing import Pool
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from config import MAX_NONCONVERGENCE_RATE, MLE_MAX_ITERATIONS, MLE_TOLERANCE
from errors import ExcessiveNonConvergence, NoConvergence, PrecisionLoss
from scheme import Scheme
from utils.logger import setup_logger
from weibull import (
    WeibullParams,
    expected_final_failure_time,
    fisher_information,
    gamma_sequence,
    log_quantile_variance,
)

logger = setup_logger(__name__, "montecarlo.log")

VALIDATION_COLUMNS = ["s", "empirical", "asymptotic", "ratio", "replications", "excluded"]

# Batch size for vectorised simulation
BATCH_SIZE = 100_000


@dataclass(frozen=True)
class CensoredSample:
    """Observed failure times X_{1:m:n} < ... < X_{m:m:n} under a scheme"""
    times: Tuple[float, ...]
    scheme: Scheme

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if len(self.times) != self.scheme.m:
            raise ValueError(f"Expected {self.scheme.m} failure times, got {len(self.times)}")
        if self.times[0] <= 0 or any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("Failure times must be positive and strictly increasing")

    def scaled(self, factor: float) -> "CensoredSample":
        return CensoredSample(tuple(t * factor for t in self.times), self.scheme)


@dataclass(frozen=True)
class MleEstimate:
    """Maximum likelihood estimate of (beta, k)"""
    beta_hat: float
    k_hat: float
    converged: bool
    iterations: int

    def log_quantile(self, s: float) -> float:
        """ln X_s = -ln k + ln(-ln(1 - s)) / beta"""
        return -math.log(self.k_hat) + math.log(-math.log1p(-s)) / self.beta_hat


@dataclass(frozen=True)
class MeanCheck:
    """Empirical E[X_{m:m:n}] against the closed form"""
    empirical: float
    standard_error: float
    closed_form: float
    replications: int

    @property
    def z_score(self) -> float:
        return (self.empirical - self.closed_form) / self.standard_error


def simulate_samples(
    scheme: Scheme,
    params: WeibullParams,
    rng: np.random.Generator,
    size: int
) -> np.ndarray:
    """
    `size` independent samples as a (size, m) array

    Independent unit exponentials divided by gamma_i and accumulated give
    -ln(1 - F(X_{i:m:n})) = (k X_{i:m:n})^beta, which is then inverted
    """
    gamma = gamma_sequence(scheme).astype(float)
    spacings = rng.standard_exponential((size, scheme.m)) / gamma
    exposure = np.cumsum(spacings, axis=1)
    return exposure ** (1.0 / params.beta) / params.k


def simulate_sample(scheme: Scheme, params: WeibullParams, rng: np.random.Generator) -> CensoredSample:
    """One progressively Type-II censored Weibull sample"""
    return CensoredSample(tuple(simulate_samples(scheme, params, rng, 1)[0]), scheme)


def _profile(beta: float, centered: np.ndarray, weights: np.ndarray) -> Tuple[float, float]:
    """Profile score in beta and its derivative, with ln x centred at its mean"""
    u = beta * centered
    e = weights * np.exp(u - u.max())
    p = e / e.sum()
    mean = float(p @ centered)
    var = max(float(p @ (centered * centered)) - mean ** 2, 0.0)
    return 1.0 / beta - mean, -1.0 / beta ** 2 - var


def fit_mle(
    sample: CensoredSample,
    max_iterations: int = MLE_MAX_ITERATIONS,
    tolerance: float = MLE_TOLERANCE
) -> MleEstimate:
    """
    Maximise the progressive-censoring Weibull likelihood

    The profile equation 1/beta + mean(ln x) - sum w x^b ln x / sum w x^b = 0,
    w_i = 1 + R_i, is solved by Newton steps kept inside a sign bracket;
    k then follows from k^beta = m / sum w x^beta.

    Raises:
        NoConvergence: degenerate sample or no root within max_iterations
    """
    log_x = np.log(np.asarray(sample.times))
    weights = 1.0 + np.asarray(sample.scheme.r, dtype=float)
    m = len(log_x)
    centered = log_x - log_x.mean()

    if m < 2 or np.ptp(centered) == 0:
        raise NoConvergence(
            "Shape is not identifiable from fewer than two distinct failure times",
            MleEstimate(math.nan, math.nan, False, 0),
        )

    # Method-of-moments start from the extreme-value spread of ln x
    beta = math.pi / math.sqrt(6) / max(float(centered.std()), 1e-12)
    lo, hi = 0.0, math.inf

    for iteration in range(1, max_iterations + 1):
        score, slope = _profile(beta, centered, weights)
        if abs(score) <= tolerance:
            log_k = (math.log(m) - logsumexp(beta * log_x, b=weights)) / beta
            return MleEstimate(beta, math.exp(log_k), True, iteration)

        # score is strictly decreasing in beta
        if score > 0:
            lo = beta
        else:
            hi = beta

        step = beta - score / slope
        if not (math.isfinite(step) and lo < step < hi):
            step = 2.0 * beta if math.isinf(hi) else 0.5 * (lo + hi)
        beta = step

    raise NoConvergence(
        f"Profile equation unsolved after {max_iterations} iterations",
        MleEstimate(beta, math.nan, False, max_iterations),
    )


def _asymptotic_fisher(scheme: Scheme, params: WeibullParams):
    try:
        return fisher_information(scheme, params)
    except PrecisionLoss as e:
        logger.warning(f"Precision fallback in Fisher information: {e}")
        return fisher_information(scheme, params, extended=True)


def _replicate(task) -> Optional[np.ndarray]:
    """ln X_s for every s of one replication, None when the fit fails"""
    scheme, params, s_grid, rng = task
    sample = simulate_sample(scheme, params, rng)
    try:
        estimate = fit_mle(sample)
    except NoConvergence as e:
        logger.debug(f"Replication excluded: {e}")
        return None
    return np.array([estimate.log_quantile(s) for s in s_grid])


def empirical_variance_check(
    scheme: Scheme,
    params: WeibullParams,
    s_grid: Sequence[float],
    replications: int,
    rng: np.random.Generator,
    workers: int = 1
) -> pd.DataFrame:
    """
    Compare the empirical variance of ln X_s with its delta-method value

    Args:
        scheme: Censoring scheme
        params: True Weibull parameters
        s_grid: Quantile levels in (0, 1)
        replications: Number of simulated experiments (at least 1000)
        rng: Generator; one child stream is spawned per replication
        workers: Worker processes for the replications

    Returns:
        DataFrame with columns s, empirical, asymptotic, ratio, replications, excluded

    Raises:
        ExcessiveNonConvergence: 1% or more of the fits failed
    """
    if replications < 1000:
        raise ValueError(f"At least 1000 replications are required, got {replications}")
    s_grid = [float(s) for s in s_grid]
    if not s_grid or any(not 0 < s < 1 for s in s_grid):
        raise ValueError(f"Quantile levels must lie in (0, 1): {s_grid}")

    fisher = _asymptotic_fisher(scheme, params)
    asymptotic = [log_quantile_variance(fisher, params, s) for s in s_grid]

    tasks = [(scheme, params, s_grid, child) for child in rng.spawn(replications)]
    logger.info(
        f"Variance check: {scheme.display()} (n={scheme.n}), beta={params.beta:g}, "
        f"k={params.k:g}, {replications} replications, workers={workers}"
    )
    if workers > 1:
        with Pool(processes=workers) as pool:
            results = pool.map(_replicate, tasks, chunksize=max(1, replications // (4 * workers)))
    else:
        results = [_replicate(task) for task in tasks]

    fitted = [r for r in results if r is not None]
    excluded = replications - len(fitted)
    rate = excluded / replications
    if rate >= MAX_NONCONVERGENCE_RATE:
        logger.warning(f"{excluded} of {replications} fits failed")
        raise ExcessiveNonConvergence(rate, MAX_NONCONVERGENCE_RATE)

    empirical = np.var(np.vstack(fitted), axis=0, ddof=1)
    table = pd.DataFrame({
        "s": s_grid,
        "empirical": empirical,
        "asymptotic": asymptotic,
    })
    table["ratio"] = table["empirical"] / table["asymptotic"]
    table["replications"] = replications
    table["excluded"] = excluded
    return table[VALIDATION_COLUMNS]


def final_failure_mean_check(
    scheme: Scheme,
    params: WeibullParams,
    replications: int,
    rng: np.random.Generator
) -> MeanCheck:
    """Sample mean and standard error of X_{m:m:n} against the closed form"""
    if replications < 2:
        raise ValueError("Need at least two replications for a standard error")

    finals: List[np.ndarray] = []
    remaining = replications
    while remaining > 0:
        size = min(BATCH_SIZE, remaining)
        finals.append(simulate_samples(scheme, params, rng, size)[:, -1])
        remaining -= size
    values = np.concatenate(finals)

    try:
        closed_form = expected_final_failure_time(scheme, params)
    except PrecisionLoss:
        closed_form = expected_final_failure_time(scheme, params, extended=True)

    return MeanCheck(
        empirical=float(values.mean()),
        standard_error=float(values.std(ddof=1) / math.sqrt(replications)),
        closed_form=closed_form,
        replications=replications,
    )
