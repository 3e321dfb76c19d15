"""
Progressive Type-II censoring schemes
The search space CS(n, m): validation, cardinality and lexicographic enumeration
"""
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

from errors import BadDimensions, NegativeRemoval, SumMismatch
from utils.scheme_format import format_removals, format_run_length, parse_removals


@dataclass(frozen=True)
class Scheme:
    """Removal vector (R_1, ..., R_m) for n units on test and m observed failures"""
    n: int
    m: int
    r: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(int(x) for x in self.r))
        _check_dimensions(self.n, self.m)
        if len(self.r) != self.m:
            raise BadDimensions(f"Scheme has {len(self.r)} removals, expected m={self.m}")
        if any(x < 0 for x in self.r):
            raise NegativeRemoval(f"Negative removal in {self.r}")
        if sum(self.r) != self.n - self.m:
            raise SumMismatch(
                f"Removals sum to {sum(self.r)}, expected n - m = {self.n - self.m}"
            )

    @classmethod
    def parse(cls, n: int, m: int, text: str) -> "Scheme":
        """Build a scheme from `0,4,1,0,0` or `(0^5, 20, 0^4)` text"""
        return validate(n, m, parse_removals(text))

    @property
    def total_removed(self) -> int:
        return self.n - self.m

    def one_step(self) -> bool:
        """True when censoring happens at exactly one failure time"""
        return sum(1 for x in self.r if x > 0) == 1

    def display(self) -> str:
        return format_run_length(self.r)

    def __str__(self) -> str:
        return format_removals(self.r)

    def __repr__(self) -> str:
        return f"Scheme(n={self.n}, m={self.m}, r={self.display()})"


def _check_dimensions(n: int, m: int) -> None:
    if m < 1 or n < m:
        raise BadDimensions(f"Need n >= m >= 1, got n={n}, m={m}")


def validate(n: int, m: int, r: Sequence[int]) -> Scheme:
    """
    Validate raw inputs and return a Scheme

    Raises:
        BadDimensions: m < 1, n < m or len(r) != m
        NegativeRemoval: some R_i < 0
        SumMismatch: sum(r) != n - m
    """
    return Scheme(n, m, tuple(r))


def cardinality(n: int, m: int) -> int:
    """|CS(n, m)| = C(n-1, m-1), exact"""
    _check_dimensions(n, m)
    return math.comb(n - 1, m - 1)


def _count(total: int, parts: int) -> int:
    """Number of weak compositions of `total` into `parts` parts"""
    if parts == 0:
        return 1 if total == 0 else 0
    return math.comb(total + parts - 1, parts - 1)


def scheme_rank(scheme: Scheme) -> int:
    """Lexicographic rank of a scheme within CS(n, m), starting at 0"""
    rank = 0
    remaining = scheme.total_removed
    m = scheme.m
    for i, value in enumerate(scheme.r[:-1]):
        # Every smaller value at position i precedes this scheme
        for smaller in range(value):
            rank += _count(remaining - smaller, m - i - 1)
        remaining -= value
    return rank


def scheme_unrank(n: int, m: int, rank: int) -> Scheme:
    """Scheme with the given lexicographic rank in CS(n, m)"""
    total = cardinality(n, m)
    if not 0 <= rank < total:
        raise IndexError(f"Rank {rank} outside [0, {total})")

    removals = []
    remaining = n - m
    for i in range(m - 1):
        value = 0
        while True:
            block = _count(remaining - value, m - i - 1)
            if rank < block:
                break
            rank -= block
            value += 1
        removals.append(value)
        remaining -= value
    removals.append(remaining)
    return Scheme(n, m, tuple(removals))


def _successor(r: List[int]) -> bool:
    """Advance `r` in place to the next composition; False after the last one"""
    tail = 0
    for i in range(len(r) - 2, -1, -1):
        tail += r[i + 1]
        if tail > 0:
            r[i] += 1
            for j in range(i + 1, len(r) - 1):
                r[j] = 0
            r[-1] = tail - 1
            return True
    return False


def enumerate_schemes(
    n: int,
    m: int,
    start: int = 0,
    stop: Optional[int] = None
) -> Iterator[Scheme]:
    """
    Yield every scheme of CS(n, m) exactly once in lexicographic order

    Args:
        n: Units on test
        m: Observed failures
        start: First rank to yield (for chunked enumeration)
        stop: Rank one past the last to yield (defaults to the cardinality)
    """
    total = cardinality(n, m)
    stop = total if stop is None else min(stop, total)
    if start >= stop:
        return

    current = list(scheme_unrank(n, m, start).r)
    for _ in range(stop - start):
        yield Scheme(n, m, tuple(current))
        if not _successor(current):
            return


def chunk_bounds(total: int, chunks: int) -> List[Tuple[int, int]]:
    """Split ranks [0, total) into at most `chunks` contiguous non-empty windows"""
    chunks = max(1, min(chunks, total))
    size, extra = divmod(total, chunks)
    bounds = []
    start = 0
    for i in range(chunks):
        stop = start + size + (1 if i < extra else 0)
        bounds.append((start, stop))
        start = stop
    return bounds
