"""
Optimality criteria under the Weibull lifetime model
F(x) = 1 - exp(-(k x)^beta); Kamps-Cramer coefficients, Fisher information,
integrated log-quantile variance and the expected-duration cost
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from threading import Lock
from typing import Dict, Optional, Tuple

import mpmath
import numpy as np
from scipy.special import gammaln

from config import CONDITION_LIMIT, EXTENDED_PRECISION_DPS, MIN_BETA
from errors import PrecisionLoss, SingularInformation
from scheme import Scheme
from utils.logger import setup_logger

logger = setup_logger(__name__, "weibull.log")

EULER_GAMMA = float(np.euler_gamma)
PI2_OVER_6 = math.pi ** 2 / 6

# Integrals over s in (0, 1) of g(s) and g(s)^2, g(s) = ln(-ln(1 - s))
G_INTEGRAL = -EULER_GAMMA
G2_INTEGRAL = EULER_GAMMA ** 2 + PI2_OVER_6


@dataclass(frozen=True)
class WeibullParams:
    """Shape beta and scale k"""
    beta: float
    k: float

    def __post_init__(self):
        if not (self.beta > 0 and self.k > 0):
            raise ValueError(f"Weibull parameters must be positive, got beta={self.beta}, k={self.k}")
        if self.beta < MIN_BETA:
            raise ValueError(f"beta={self.beta} is below the supported minimum {MIN_BETA}")


@dataclass(frozen=True)
class CostCoefficients:
    """Fixed cost C_o, cost per failure C_f, cost per unit test duration C_t"""
    c_o: float = 0.0
    c_f: float = 0.0
    c_t: float = 0.0

    def __post_init__(self):
        if min(self.c_o, self.c_f, self.c_t) < 0:
            raise ValueError(f"Cost coefficients must be non-negative: {self}")


class CriterionKind(Enum):
    """Which psi(R) is minimised"""
    VARIANCE = "variance"   # Integrated asymptotic variance of ln X_s
    COST = "cost"           # C_o + C_f m + C_t E[X_{m:m:n}]


@dataclass(frozen=True)
class CriterionSpec:
    kind: CriterionKind
    costs: Optional[CostCoefficients] = None

    def __post_init__(self):
        if self.kind is CriterionKind.COST and self.costs is None:
            raise ValueError("Cost criterion needs cost coefficients")
        if self.kind is CriterionKind.VARIANCE and self.costs is not None:
            raise ValueError("Variance criterion takes no cost coefficients")

    @classmethod
    def variance(cls) -> "CriterionSpec":
        return cls(CriterionKind.VARIANCE)

    @classmethod
    def cost(cls, c_o: float = 0.0, c_f: float = 0.0, c_t: float = 0.0) -> "CriterionSpec":
        return cls(CriterionKind.COST, CostCoefficients(c_o, c_f, c_t))

    def __str__(self) -> str:
        if self.costs is None:
            return self.kind.value
        return f"cost(co={self.costs.c_o:g}, cf={self.costs.c_f:g}, ct={self.costs.c_t:g})"


@dataclass(frozen=True)
class KampsCramerCoeffs:
    """
    Kamps-Cramer representation of a scheme

    gamma[r-1] = gamma_r, sigma[r-1] = sigma_{r-1} = gamma_1 ... gamma_r,
    a[r-1, i-1] = a_{i,r} (lower triangular). weights[r-1, i-1] holds the
    product sigma_{r-1} a_{i,r}, computed directly so it stays finite when
    sigma alone overflows.
    """
    gamma: np.ndarray
    sigma: np.ndarray
    a: np.ndarray
    weights: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.gamma)

    def coefficient(self, i: int, r: int) -> float:
        """a_{i,r} with 1-based indices, 1 <= i <= r <= m"""
        if not 1 <= i <= r <= self.m:
            raise IndexError(f"a_{{{i},{r}}} undefined for m={self.m}")
        return float(self.a[r - 1, i - 1])


@dataclass(frozen=True)
class FisherInfo:
    """Symmetric 2x2 Fisher information about (beta, k)"""
    i11: float
    i12: float
    i22: float

    @property
    def determinant(self) -> float:
        return self.i11 * self.i22 - self.i12 ** 2

    def inverse(self) -> Tuple[float, float, float]:
        """(I^11, I^12, I^22) entries of the inverse"""
        det = self.determinant
        if not det > 0 or not self.i11 > 0 or not self.i22 > 0:
            raise SingularInformation(
                f"Fisher information not positive definite: det={det:.3e}, "
                f"I11={self.i11:.3e}, I22={self.i22:.3e}"
            )
        return self.i22 / det, -self.i12 / det, self.i11 / det

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.i11, self.i12], [self.i12, self.i22]])


def gamma_sequence(scheme: Scheme) -> np.ndarray:
    """gamma_r = m - r + 1 + R_r + ... + R_m, as integers"""
    r = np.asarray(scheme.r, dtype=np.int64)
    tail = np.cumsum(r[::-1])[::-1]
    return np.arange(scheme.m, 0, -1, dtype=np.int64) + tail


def _weight_matrix(gamma: np.ndarray) -> np.ndarray:
    """W[r, i] = sigma_r a_{i+1, r+1} (0-based) via cumulative products of gamma_l / (gamma_l - gamma_i)"""
    g = gamma.astype(float)
    diff = g[:, None] - g[None, :]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(np.eye(len(g), dtype=bool), 1.0, g[:, None] / diff)
        weights = g[None, :] * np.cumprod(ratio, axis=0)
    return np.tril(weights)


def kamps_cramer(scheme: Scheme) -> KampsCramerCoeffs:
    """Kamps-Cramer coefficients gamma, sigma and a for a scheme"""
    gamma = gamma_sequence(scheme)
    weights = _weight_matrix(gamma)
    with np.errstate(over="ignore", invalid="ignore"):
        sigma = np.cumprod(gamma.astype(float))
        a = np.tril(weights / sigma[:, None])
    return KampsCramerCoeffs(gamma=gamma, sigma=sigma, a=a, weights=weights)


def _condition(terms: np.ndarray, scale: Optional[np.ndarray] = None) -> float:
    """
    sum |terms| / |sum terms| along the last axis, worst case over rows

    Args:
        terms: Summands, one row per sum
        scale: Per-row floor for |sum terms|, for sums that may legitimately vanish
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        total = np.abs(terms.sum(axis=-1))
        if scale is not None:
            total = np.maximum(total, scale)
        magnitude = np.abs(terms).sum(axis=-1)
        condition = np.where(total > 0, magnitude / total, np.inf)
    worst = float(np.max(condition))
    return worst if np.isfinite(worst) else math.inf


def _check_condition(terms: np.ndarray, scale: Optional[np.ndarray] = None) -> None:
    condition = _condition(terms, scale)
    if condition > CONDITION_LIMIT:
        raise PrecisionLoss(condition, CONDITION_LIMIT)


def _extended_weights(gamma: np.ndarray):
    """Weight matrix as mpmath numbers (call inside mpmath.workdps)"""
    g = [mpmath.mpf(int(x)) for x in gamma]
    m = len(g)
    weights = [[mpmath.mpf(0)] * m for _ in range(m)]
    for i in range(m):
        # Diagonal: gamma_i prod_{l<i} gamma_l / (gamma_l - gamma_i)
        w = g[i]
        for l in range(i):
            w *= g[l] / (g[l] - g[i])
        weights[i][i] = w
        for r in range(i + 1, m):
            w *= g[r] / (g[r] - g[i])
            weights[r][i] = w
    return g, weights


def _duration_sum(coeffs: KampsCramerCoeffs, beta: float, extended: bool) -> float:
    """sum_p sigma_{m-1} a_{p,m} / gamma_p^(1 + 1/beta)"""
    exponent = 1.0 + 1.0 / beta
    if extended:
        with mpmath.workdps(EXTENDED_PRECISION_DPS):
            g, weights = _extended_weights(coeffs.gamma)
            x = mpmath.mpf(1) + mpmath.mpf(1) / mpmath.mpf(beta)
            total = mpmath.fsum(w / gp ** x for w, gp in zip(weights[-1], g))
            return float(total)

    g = coeffs.gamma.astype(float)
    terms = coeffs.weights[-1] * g ** -exponent
    _check_condition(terms)
    return float(terms.sum())


def _fisher_sums(coeffs: KampsCramerCoeffs, extended: bool) -> Tuple[float, float, float]:
    """
    Double sums over i and j of sigma_{i-1} a_{j,i} / gamma_j times
    1, (c_j - gamma_E) and (c_j - gamma_E)^2 + pi^2/6, with c_j = 1 - ln gamma_j
    """
    if extended:
        with mpmath.workdps(EXTENDED_PRECISION_DPS):
            g, weights = _extended_weights(coeffs.gamma)
            shift = [1 - mpmath.log(gj) - mpmath.euler for gj in g]
            square = [d ** 2 + mpmath.pi ** 2 / 6 for d in shift]
            m = len(g)
            terms = [weights[r][j] / g[j] for r in range(m) for j in range(r + 1)]
            cols = [j for r in range(m) for j in range(r + 1)]
            s0 = mpmath.fsum(terms)
            s1 = mpmath.fsum(t * shift[j] for t, j in zip(terms, cols))
            s2 = mpmath.fsum(t * square[j] for t, j in zip(terms, cols))
            return float(s0), float(s1), float(s2)

    g = coeffs.gamma.astype(float)
    base = coeffs.weights / g[None, :]
    shift = base * (1.0 - np.log(g) - EULER_GAMMA)[None, :]
    square = base * ((1.0 - np.log(g) - EULER_GAMMA) ** 2 + PI2_OVER_6)[None, :]
    _check_condition(base)
    _check_condition(square)
    # Row i of shift sums to E[1 + ln Z_i], which can cross zero; measure it
    # against the root of the matching second moment instead
    _check_condition(shift, scale=np.sqrt(np.abs(square.sum(axis=-1))))
    return float(base.sum()), float(shift.sum()), float(square.sum())


def expected_final_failure_time(
    scheme: Scheme,
    params: WeibullParams,
    extended: bool = False
) -> float:
    """
    E[X_{m:m:n}] = (1/k) Gamma(1 + 1/beta) sigma_{m-1} sum_p a_{p,m} / gamma_p^(1+1/beta)

    Raises:
        PrecisionLoss: double-precision sum is ill-conditioned (retry with extended=True)
    """
    coeffs = kamps_cramer(scheme)
    total = _duration_sum(coeffs, params.beta, extended)
    return math.exp(gammaln(1.0 + 1.0 / params.beta)) * total / params.k


def fisher_information(
    scheme: Scheme,
    params: WeibullParams,
    extended: bool = False
) -> FisherInfo:
    """
    Fisher information about (beta, k) with the inner integrals in closed form:
    int (1 + ln(z/g))^2 e^-z dz = (c - gamma_E)^2 + pi^2/6 and
    int (1 + ln(z/g)) e^-z dz = c - gamma_E, where c = 1 - ln g
    """
    coeffs = kamps_cramer(scheme)
    s0, s1, s2 = _fisher_sums(coeffs, extended)
    beta, k = params.beta, params.k
    return FisherInfo(
        i11=s2 / beta ** 2,
        i12=s1 / k,
        i22=(beta / k) ** 2 * s0,
    )


def log_quantile_variance(fisher: FisherInfo, params: WeibullParams, s: float) -> float:
    """Delta-method Var[ln X_s] = I^11 g^2 / beta^4 + 2 I^12 g / (beta^2 k) + I^22 / k^2"""
    if not 0 < s < 1:
        raise ValueError(f"Quantile level must lie in (0, 1), got {s}")
    inv11, inv12, inv22 = fisher.inverse()
    g = math.log(-math.log1p(-s))
    beta, k = params.beta, params.k
    return inv11 * g ** 2 / beta ** 4 + 2 * inv12 * g / (beta ** 2 * k) + inv22 / k ** 2


def variance_criterion(
    scheme: Scheme,
    params: WeibullParams,
    extended: bool = False
) -> float:
    """Asymptotic integral over s in (0, 1) of Var[ln X_s]"""
    fisher = fisher_information(scheme, params, extended)
    inv11, inv12, inv22 = fisher.inverse()
    beta, k = params.beta, params.k
    psi = (
        inv11 / beta ** 4 * G2_INTEGRAL
        + 2 * inv12 / (beta ** 2 * k) * G_INTEGRAL
        + inv22 / k ** 2
    )
    # A positive definite inverse keeps the quadratic form non-negative
    return max(psi, 0.0)


def cost_criterion(
    scheme: Scheme,
    params: WeibullParams,
    costs: CostCoefficients,
    extended: bool = False
) -> float:
    """C_o + C_f m + C_t E[X_{m:m:n}]"""
    psi = costs.c_o + costs.c_f * scheme.m
    if costs.c_t:
        psi += costs.c_t * expected_final_failure_time(scheme, params, extended)
    return psi


def criterion_transform(psi: float) -> float:
    """f = exp(-psi), the monotone decreasing transform used for acceptance"""
    if psi < 0:
        raise ValueError(f"Criterion values are non-negative, got {psi}")
    return math.exp(-psi)


def evaluate_criterion(
    scheme: Scheme,
    params: WeibullParams,
    spec: CriterionSpec,
    extended: bool = False
) -> float:
    """psi(R) for the configured criterion"""
    if spec.kind is CriterionKind.VARIANCE:
        return variance_criterion(scheme, params, extended)
    return cost_criterion(scheme, params, spec.costs, extended)


class CriterionEvaluator:
    """Memoised psi(R) for one (params, criterion) pair, safe to share across threads"""

    def __init__(self, params: WeibullParams, spec: CriterionSpec):
        self.params = params
        self.spec = spec
        self._cache: Dict[Tuple[int, int, Tuple[int, ...]], float] = {}
        self._lock = Lock()
        self.hits = 0
        self.misses = 0
        self.precision_fallbacks = 0

    def __call__(self, scheme: Scheme) -> float:
        key = (scheme.n, scheme.m, scheme.r)
        with self._lock:
            value = self._cache.get(key)
            if value is not None:
                self.hits += 1
                return value

        # Evaluated outside the lock; two threads may compute the same key
        value = self._evaluate(scheme)

        with self._lock:
            self.misses += 1
            self._cache[key] = value
        return value

    def _evaluate(self, scheme: Scheme) -> float:
        try:
            return evaluate_criterion(scheme, self.params, self.spec)
        except PrecisionLoss as e:
            logger.warning(f"Precision fallback for {scheme.display()}: {e}")
            with self._lock:
                self.precision_fallbacks += 1
            return evaluate_criterion(scheme, self.params, self.spec, extended=True)

    def __len__(self) -> int:
        with self._lock:
            return len(self._cache)

    def get_stats(self) -> Dict:
        """Cache statistics"""
        with self._lock:
            return {
                "cached": len(self._cache),
                "hits": self.hits,
                "misses": self.misses,
                "precision_fallbacks": self.precision_fallbacks,
            }
