"""
Uniform sequential proposal
R_1 is uniform on {0..bound}, every later R_j uniform on {0..remaining budget},
and the last coordinate takes whatever is left
"""
import math
from typing import Optional, Tuple

import numpy as np

from proposals.base import Proposal, ProposalKind
from scheme import Scheme


def _first_bound(n: int, m: int, cap: Optional[int]) -> int:
    total = n - m
    if cap is None:
        return total
    if not 0 <= cap <= total:
        raise ValueError(f"cap must lie in [0, n - m = {total}], got {cap}")
    return cap


def uniform_sequential_sample(
    n: int,
    m: int,
    cap: Optional[int],
    rng: np.random.Generator
) -> Tuple[Scheme, float]:
    """
    Draw a scheme coordinate by coordinate

    Args:
        n: Units on test
        m: Observed failures
        cap: Upper bound for R_1 (n - m - r_0 in an update); None for the initial draw
        rng: Generator

    Returns:
        (scheme, log density), the density being the product of
        1 / (bound_j + 1) over the m - 1 free draws
    """
    bound = _first_bound(n, m, cap)
    remaining = n - m
    removals = []
    log_density = 0.0

    for _ in range(m - 1):
        value = int(rng.integers(0, bound + 1))
        log_density -= math.log(bound + 1)
        removals.append(value)
        remaining -= value
        bound = remaining
    removals.append(remaining)

    return Scheme(n, m, tuple(removals)), log_density


def uniform_sequential_log_density(scheme: Scheme, cap: Optional[int] = None) -> float:
    """Log probability that uniform_sequential_sample returns `scheme` (-inf if R_1 > cap)"""
    bound = _first_bound(scheme.n, scheme.m, cap)
    remaining = scheme.total_removed
    log_density = 0.0

    for value in scheme.r[:-1]:
        if value > bound:
            return -math.inf
        log_density -= math.log(bound + 1)
        remaining -= value
        bound = remaining
    return log_density


class UniformProposal(Proposal):
    """
    Sequential uniform proposal; an update picks one position of the current
    scheme and caps the new R_1 at n - m minus the value found there
    """

    kind = ProposalKind.UNIFORM

    def initial(self) -> Tuple[Scheme, float]:
        return uniform_sequential_sample(self.n, self.m, None, self.rng)

    def propose(self, current: Scheme, m1: int) -> Tuple[Scheme, float]:
        # m1 is not used: this update regenerates the whole scheme
        position = int(self.rng.integers(0, self.m))
        cap = self.n - self.m - current.r[position]
        return uniform_sequential_sample(self.n, self.m, cap, self.rng)
