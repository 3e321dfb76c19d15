"""
Exceptions raised by the censoring scheme search
"""
from typing import Any, Optional


class CensearchError(Exception):
    """Base class for every error raised by this package"""


class SchemeError(CensearchError, ValueError):
    """A removal vector does not describe a valid progressive censoring scheme"""


class BadDimensions(SchemeError):
    """m < 1, n < m, or the removal vector has the wrong length"""


class SumMismatch(SchemeError):
    """Removals do not add up to n - m"""


class NegativeRemoval(SchemeError):
    """A removal count is negative"""


class PrecisionLoss(CensearchError):
    """An alternating Kamps-Cramer sum lost too many digits in double precision"""

    def __init__(self, condition: float, limit: float):
        self.condition = condition
        self.limit = limit
        super().__init__(
            f"Alternating sum condition number {condition:.3e} exceeds {limit:.1e}"
        )


class SingularInformation(CensearchError):
    """Fisher information matrix is not numerically positive definite"""


class InvalidDensity(CensearchError):
    """The current chain state has zero proposal density"""


class NonPositive(CensearchError, ValueError):
    """A relative efficiency was requested for a non-positive criterion value"""


class BudgetExceeded(CensearchError):
    """Exhaustive search refused because CS(n, m) is larger than the budget"""

    def __init__(self, cardinality: int, budget: int):
        self.cardinality = cardinality
        self.budget = budget
        super().__init__(
            f"|CS(n, m)| = {cardinality} exceeds the exhaustive-search budget {budget}"
        )


class UnsupportedValue(CensearchError, ValueError):
    """A scheme lies outside the support of a proposal distribution"""


class NoConvergence(CensearchError):
    """Maximum likelihood fitting did not converge"""

    def __init__(self, message: str, estimate: Optional[Any] = None):
        self.estimate = estimate
        super().__init__(message)


class ExcessiveNonConvergence(CensearchError):
    """Too many Monte-Carlo replications failed to produce an MLE"""

    def __init__(self, rate: float, limit: float):
        self.rate = rate
        self.limit = limit
        super().__init__(
            f"MLE non-convergence rate {rate:.2%} is not below {limit:.2%}"
        )
