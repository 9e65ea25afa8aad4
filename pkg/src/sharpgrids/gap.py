"""Symmetric coefficient boxes realizing the progressions A_m(Lambda)."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

from .numberfield import DimensionError


def integer_nth_root(m: int, n: int) -> int:
    """Largest integer ``x`` with ``x**n <= m``, by binary search."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if n < 1:
        raise ValueError("n must be positive")
    if m < 2 or n == 1:
        return m
    lo, hi = 0, 1 << (m.bit_length() // n + 1)
    # invariant: lo**n <= m < hi**n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid**n <= m:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class GapBox:
    """All coordinate vectors of length ``n`` with every |a_i| <= ``h``."""

    n: int
    h: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("box dimension must be positive")
        if self.h < 0:
            raise ValueError("half-width must be non-negative")

    @property
    def side(self) -> int:
        return 2 * self.h + 1

    @property
    def cardinality(self) -> int:
        return self.side**self.n

    def __len__(self) -> int:
        return self.cardinality

    def enumerate(self) -> Iterator[tuple[int, ...]]:
        """Lexicographic order starting at (-h, ..., -h)."""
        return product(range(-self.h, self.h + 1), repeat=self.n)

    __iter__ = enumerate

    def contains(self, x: Sequence[int]) -> bool:
        if len(x) != self.n:
            raise DimensionError(f"vector of length {len(x)} tested against a box of dimension {self.n}")
        h = self.h
        return all(-h <= a <= h for a in x)

    def __contains__(self, x: Sequence[int]) -> bool:
        return self.contains(x)

    def vector_at(self, index: int) -> tuple[int, ...]:
        """The ``index``-th vector of :meth:`enumerate`."""
        if not 0 <= index < self.cardinality:
            raise IndexError(index)
        side, h = self.side, self.h
        digits = []
        for _ in range(self.n):
            index, d = divmod(index, side)
            digits.append(d - h)
        return tuple(reversed(digits))

    def index_of(self, x: Sequence[int]) -> int:
        if not self.contains(x):
            raise ValueError(f"{tuple(x)} is not in the box")
        idx = 0
        for a in x:
            idx = idx * self.side + (a + self.h)
        return idx

    def to_dict(self) -> dict[str, int]:
        return {"n": self.n, "h": self.h, "cardinality": self.cardinality}


def box_for_size(m: int, n: int) -> GapBox:
    """Box standing in for A_m: half-width floor(floor(m^(1/n)) / 2)."""
    if m < 1:
        raise ValueError("box size must be at least 1")
    return GapBox(n, integer_nth_root(m, n) // 2)
