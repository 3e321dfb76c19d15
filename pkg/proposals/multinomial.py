"""
Multinomial proposal
Cell probabilities are drawn once per chain and held fixed
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, xlogy

from proposals.base import (
    Proposal,
    ProposalKind,
    draw_selection,
    replace_positions,
)
from scheme import Scheme


@dataclass(frozen=True)
class MultinomialState:
    """Cell probabilities p_1 ... p_m"""
    p: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        if any(x <= 0 for x in self.p):
            raise ValueError(f"Cell probabilities must be positive: {self.p}")
        if abs(sum(self.p) - 1.0) > 1e-12:
            raise ValueError(f"Cell probabilities sum to {sum(self.p)!r}, not 1")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.p)


def multinomial_init(n: int, m: int, rng: np.random.Generator) -> Tuple[Scheme, MultinomialState]:
    """
    Normalise m uniform draws into p, then draw R ~ Multinomial(n - m; p)
    """
    # 1 - U lies in (0, 1], so every cell keeps positive probability
    u = 1.0 - rng.random(m)
    p = u / u.sum()
    state = MultinomialState(tuple(p))
    removals = rng.multinomial(n - m, state.array)
    return Scheme(n, m, tuple(removals)), state


def multinomial_update(
    old: Scheme,
    state: MultinomialState,
    m1: int,
    rng: np.random.Generator,
    positions: Optional[Sequence[int]] = None
) -> Scheme:
    """
    Redraw the selected coordinates from Multinomial(sum R'_j; q) with
    q_j = p_j / sum of selected p, keeping the other coordinates
    """
    selection = draw_selection(old.m, m1, rng, positions)
    index = list(selection.positions)
    sub_total = int(sum(old.r[i] for i in index))
    p = state.array[index]
    q = p / p.sum()
    values = rng.multinomial(sub_total, q)
    return replace_positions(old, selection, values)


def multinomial_log_density(scheme: Scheme, state: MultinomialState) -> float:
    """log of (n-m)! / prod R_i! * prod p_i^R_i"""
    r = np.asarray(scheme.r, dtype=float)
    log_coef = gammaln(scheme.total_removed + 1) - gammaln(r + 1).sum()
    return float(log_coef + xlogy(r, state.array).sum())


class MultinomialProposal(Proposal):
    """Multinomial proposal with a per-chain probability vector"""

    kind = ProposalKind.MULTINOMIAL

    def __init__(self, n: int, m: int, rng: np.random.Generator):
        super().__init__(n, m, rng)
        self.state: Optional[MultinomialState] = None

    def initial(self) -> Tuple[Scheme, float]:
        scheme, self.state = multinomial_init(self.n, self.m, self.rng)
        return scheme, multinomial_log_density(scheme, self.state)

    def propose(self, current: Scheme, m1: int) -> Tuple[Scheme, float]:
        if self.state is None:
            raise RuntimeError("initial() must run before propose()")
        candidate = multinomial_update(current, self.state, m1, self.rng)
        return candidate, multinomial_log_density(candidate, self.state)
