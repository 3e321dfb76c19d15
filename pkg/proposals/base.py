"""
Common interface for proposal distributions over CS(n, m)
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from scheme import Scheme


class ProposalKind(Enum):
    """The three proposal distributions"""
    MULTINOMIAL = "multinomial"
    UNIFORM = "uniform"
    MVHG = "mvhg"   # Multivariate hypergeometric


@dataclass(frozen=True)
class UpdateSelection:
    """0-based positions of the coordinates resampled in one update"""
    positions: Tuple[int, ...]

    def __post_init__(self):
        if not self.positions:
            raise ValueError("An update must resample at least one position")
        if len(set(self.positions)) != len(self.positions):
            raise ValueError(f"Duplicate positions in {self.positions}")

    @property
    def m1(self) -> int:
        return len(self.positions)


def draw_m1(m: int, rng: np.random.Generator) -> int:
    """Number of positions to resample, uniform on {1, ..., m}"""
    return int(rng.integers(1, m + 1))


def draw_selection(
    m: int,
    m1: int,
    rng: np.random.Generator,
    positions: Optional[Sequence[int]] = None
) -> UpdateSelection:
    """
    Choose m1 distinct positions uniformly without replacement

    Args:
        m: Scheme length
        m1: Number of positions, 0 < m1 <= m
        rng: Generator
        positions: Explicit positions to use instead of a random draw
    """
    if positions is not None:
        selection = UpdateSelection(tuple(sorted(int(p) for p in positions)))
        if selection.positions[0] < 0 or selection.positions[-1] >= m:
            raise ValueError(f"Positions {selection.positions} outside 0..{m - 1}")
        return selection

    if not 0 < m1 <= m:
        raise ValueError(f"m1 must satisfy 0 < m1 <= m={m}, got {m1}")
    chosen = rng.choice(m, size=m1, replace=False)
    return UpdateSelection(tuple(sorted(int(p) for p in chosen)))


def replace_positions(old: Scheme, selection: UpdateSelection, values: Sequence[int]) -> Scheme:
    """Write the redrawn sub-vector into the selected positions of `old`"""
    removals = list(old.r)
    for position, value in zip(selection.positions, values):
        removals[position] = int(value)
    return Scheme(old.n, old.m, tuple(removals))


class Proposal(ABC):
    """
    Per-chain proposal distribution

    `initial` and `propose` return the scheme together with the log
    proposal density that enters the acceptance ratio.
    """

    kind: ProposalKind

    def __init__(self, n: int, m: int, rng: np.random.Generator):
        self.n = n
        self.m = m
        self.rng = rng

    @abstractmethod
    def initial(self) -> Tuple[Scheme, float]:
        """Draw the starting scheme"""

    @abstractmethod
    def propose(self, current: Scheme, m1: int) -> Tuple[Scheme, float]:
        """Draw a candidate from the current scheme"""

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(n={self.n}, m={self.m})"
