"""
Multivariate hypergeometric proposal
Initial draw uses M_j = n - m for every cell, M = m(n - m) and R = n - m
"""
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from errors import UnsupportedValue
from proposals.base import (
    Proposal,
    ProposalKind,
    draw_selection,
    replace_positions,
)
from scheme import Scheme


def _log_binom(total, chosen):
    return gammaln(total + 1) - gammaln(chosen + 1) - gammaln(total - chosen + 1)


def _draw(cells: Sequence[int], draws: int, rng: np.random.Generator) -> np.ndarray:
    if draws == 0:
        return np.zeros(len(cells), dtype=np.int64)
    return rng.multivariate_hypergeometric(np.asarray(cells, dtype=np.int64), draws)


def global_cells(n: int, m: int) -> Tuple[Tuple[int, ...], int, int]:
    """(M_1..M_m, M, R) of the full-scheme distribution"""
    cells = (n - m,) * m
    return cells, m * (n - m), n - m


def mvhg_init(n: int, m: int, rng: np.random.Generator) -> Scheme:
    """Draw a scheme from MVHG(M; (M_1..M_m); R) with the global parameters"""
    cells, _, draws = global_cells(n, m)
    return Scheme(n, m, tuple(_draw(cells, draws, rng)))


def mvhg_update(
    old: Scheme,
    m1: int,
    rng: np.random.Generator,
    positions: Optional[Sequence[int]] = None
) -> Scheme:
    """
    Resample the selected coordinates from an MVHG whose every cell holds the
    selected sub-total, drawing that sub-total
    """
    selection = draw_selection(old.m, m1, rng, positions)
    sub_total = int(sum(old.r[i] for i in selection.positions))
    values = _draw([sub_total] * selection.m1, sub_total, rng)
    return replace_positions(old, selection, values)


def mvhg_log_density(
    scheme: Scheme,
    m_cells: Sequence[int],
    total_m: int,
    total_r: int
) -> float:
    """
    log of prod C(M_i, R_i) / C(M, R)

    Raises:
        UnsupportedValue: some R_i exceeds its cell size M_i
    """
    r = np.asarray(scheme.r, dtype=float)
    cells = np.asarray(m_cells, dtype=float)
    if len(cells) != scheme.m:
        raise ValueError(f"Expected {scheme.m} cell sizes, got {len(cells)}")
    if np.any(r > cells):
        raise UnsupportedValue(f"{scheme.display()} exceeds cell sizes {tuple(m_cells)}")
    if r.sum() != total_r:
        raise UnsupportedValue(f"{scheme.display()} does not draw R={total_r} units")
    return float(_log_binom(cells, r).sum() - _log_binom(total_m, total_r))


class MvhgProposal(Proposal):
    """Multivariate hypergeometric proposal; densities use the global parameters"""

    kind = ProposalKind.MVHG

    def __init__(self, n: int, m: int, rng: np.random.Generator):
        super().__init__(n, m, rng)
        self.cells, self.total_m, self.total_r = global_cells(n, m)

    def log_density(self, scheme: Scheme) -> float:
        return mvhg_log_density(scheme, self.cells, self.total_m, self.total_r)

    def initial(self) -> Tuple[Scheme, float]:
        scheme = mvhg_init(self.n, self.m, self.rng)
        return scheme, self.log_density(scheme)

    def propose(self, current: Scheme, m1: int) -> Tuple[Scheme, float]:
        candidate = mvhg_update(current, m1, self.rng)
        return candidate, self.log_density(candidate)
