"""Unbalanced product grids over a nice basis and their rich line family.

For a basis of dimension n with structure-constant bound C, the grid
A_r x A_{N/r} is paired with lines y = m x + b whose slope ranges over
A_{N/((n^2 C)^n r^2)} and intercept over A_{N/(2^n r)}.  Every such line
meets the grid in all (2 h_x + 1)^n points of its x-column set provided

    n^2 * C * h_m * h_x + h_b <= h_y,

which :func:`derive_params` checks before anything is enumerated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator

from .gap import GapBox, box_for_size
from .numberfield import (
    IntElement,
    MinimalPolynomial,
    StructureTable,
    _check_dims,
    add,
    c_lambda,
    mul,
    power_basis_table,
    rational_table,
)


class HypothesisError(ValueError):
    """r exceeds the square root of N."""


class ParametersTooSmallError(ValueError):
    """N is too small relative to r for a slope box to exist."""


class DerivationError(RuntimeError):
    """The derived widths fail the richness condition (internal inconsistency)."""


@dataclass(frozen=True)
class Line:
    slope: IntElement
    intercept: IntElement

    def __str__(self) -> str:
        return f"y = {self.slope} x + {self.intercept}"


@dataclass(frozen=True)
class PointGrid:
    """The implicit product x_box x y_box of field elements."""

    table: StructureTable
    x_box: GapBox
    y_box: GapBox

    @property
    def point_count(self) -> int:
        return self.x_box.cardinality * self.y_box.cardinality

    def contains(self, x: IntElement, y: IntElement) -> bool:
        return self.x_box.contains(x.coords) and self.y_box.contains(y.coords)

    def points(self) -> Iterator[tuple[IntElement, IntElement]]:
        """x-major lexicographic order."""
        for x in self.x_box.enumerate():
            xe = IntElement(x)
            for y in self.y_box.enumerate():
                yield xe, IntElement(y)


@dataclass(frozen=True)
class ConstructionParams:
    N: int
    r: int
    table: StructureTable
    h_x: int
    h_y: int
    h_m: int
    h_b: int

    @property
    def n(self) -> int:
        return self.table.n

    @property
    def c_lambda(self) -> int:
        return c_lambda(self.table)

    @property
    def x_box(self) -> GapBox:
        return GapBox(self.n, self.h_x)

    @property
    def y_box(self) -> GapBox:
        return GapBox(self.n, self.h_y)

    @property
    def slope_box(self) -> GapBox:
        return GapBox(self.n, self.h_m)

    @property
    def intercept_box(self) -> GapBox:
        return GapBox(self.n, self.h_b)

    @property
    def grid(self) -> PointGrid:
        return PointGrid(self.table, self.x_box, self.y_box)

    @property
    def guaranteed_lines(self) -> int:
        return self.slope_box.cardinality * self.intercept_box.cardinality

    @property
    def paper_lines(self) -> int:
        n = self.n
        return self.N**2 // ((2 * n * n * self.c_lambda) ** n * self.r**3)

    @property
    def achieved_richness(self) -> int:
        return self.x_box.cardinality

    @property
    def margin(self) -> int:
        """h_y - (n^2 C h_m h_x + h_b); non-negative means every line is rich."""
        n = self.n
        return self.h_y - (n * n * self.c_lambda * self.h_m * self.h_x + self.h_b)

    @property
    def degenerate(self) -> bool:
        return self.h_m == 0

    @property
    def paper_constant(self) -> Fraction:
        n = self.n
        return Fraction(1, (2 * n * n * self.c_lambda) ** n)

    def line_at(self, index: int) -> Line:
        """The ``index``-th line of :func:`build_lines`."""
        per_slope = self.intercept_box.cardinality
        if not 0 <= index < self.guaranteed_lines:
            raise IndexError(index)
        s, b = divmod(index, per_slope)
        return Line(IntElement(self.slope_box.vector_at(s)), IntElement(self.intercept_box.vector_at(b)))

    def to_dict(self) -> dict[str, Any]:
        g, p = self.guaranteed_lines, self.paper_lines
        return {
            "N": self.N,
            "r": self.r,
            "n": self.n,
            "c_lambda": self.c_lambda,
            "h_x": self.h_x,
            "h_y": self.h_y,
            "h_m": self.h_m,
            "h_b": self.h_b,
            "x_box": self.x_box.to_dict(),
            "y_box": self.y_box.to_dict(),
            "slope_box": self.slope_box.to_dict(),
            "intercept_box": self.intercept_box.to_dict(),
            "point_count": self.grid.point_count,
            "guaranteed_lines": g,
            "paper_lines": p,
            "lines_ratio": _fraction_str(Fraction(g, p)) if p else None,
            "achieved_richness": self.achieved_richness,
            "richness_below_r": self.achieved_richness < self.r,
            "richness_margin": self.margin,
            "degenerate": self.degenerate,
            "paper_constant": _fraction_str(self.paper_constant),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], table: StructureTable) -> ConstructionParams:
        """Rebuild from a report without re-deriving or re-checking widths."""
        if "n" in data and data["n"] != table.n:
            raise ValueError(f"params are for dimension {data['n']}, table has dimension {table.n}")
        values = {k: data[k] for k in ("N", "r", "h_x", "h_y", "h_m", "h_b")}
        for k, v in values.items():
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ValueError(f"{k} must be a non-negative integer, got {v!r}")
        return cls(table=table, **values)


def _fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def derive_params(N: int, r: int, table: StructureTable) -> ConstructionParams:
    if N < 1 or r < 1:
        raise ValueError("N and r must be positive")
    if r * r > N:
        raise HypothesisError(f"r={r} exceeds sqrt(N) for N={N}")
    n = table.n
    C = c_lambda(table)
    slope_arg = N // ((n * n * C) ** n * r * r)
    if slope_arg < 1:
        raise ParametersTooSmallError(
            f"N={N} is below (n^2 C)^n r^2 = {(n * n * C) ** n * r * r}; no slope box exists"
        )
    intercept_arg = N // (2**n * r)
    if intercept_arg < 1:
        raise ParametersTooSmallError(f"N={N} is below 2^n r = {2**n * r}; no intercept box exists")
    params = ConstructionParams(
        N=N,
        r=r,
        table=table,
        h_x=box_for_size(r, n).h,
        h_y=box_for_size(N // r, n).h,
        h_m=box_for_size(slope_arg, n).h,
        h_b=box_for_size(intercept_arg, n).h,
    )
    if params.margin < 0:
        raise DerivationError(f"richness condition fails with margin {params.margin}: {params}")
    return params


def build_lines(params: ConstructionParams) -> Iterator[Line]:
    intercepts = [IntElement(b) for b in params.intercept_box.enumerate()]
    for m in params.slope_box.enumerate():
        slope = IntElement(m)
        for b in intercepts:
            yield Line(slope, b)


def evaluate_line_at(line: Line, x: IntElement, table: StructureTable) -> IntElement:
    _check_dims(line.slope, line.intercept, x, table.n)
    return add(mul(line.slope, x, table), line.intercept)


# ---------------------------------------------------------------------------
# classic constructions
# ---------------------------------------------------------------------------


def is_squarefree(k: int) -> bool:
    k = abs(k)
    if k == 0:
        return False
    d = 2
    while d * d <= k:
        if k % (d * d) == 0:
            return False
        d += 1
    return True


def quadratic_table(k: int) -> StructureTable:
    """Power basis {1, sqrt(k)} of Q(sqrt(k)) for square-free k >= 2."""
    if k < 2 or not is_squarefree(k):
        raise ValueError(f"k={k} must be a square-free integer >= 2")
    return power_basis_table(MinimalPolynomial((-k, 0, 1)), math.sqrt(k))


@dataclass(frozen=True)
class ClassicConstruction:
    kind: str
    grid: PointGrid
    params: ConstructionParams | None = None


def classic_construction(kind: str, N: int, r: int, k: int | None = None) -> ClassicConstruction:
    """Comparison grids: ``erdos_balanced``, ``elekes_unbalanced``, ``guth_silier``.

    Only the Elekes grid comes with a line family; the balanced ones are
    point sets to be examined empirically with the oracle.
    """
    if N < 1 or r < 1:
        raise ValueError("N and r must be positive")
    if r * r > N:
        raise HypothesisError(f"r={r} exceeds sqrt(N) for N={N}")
    if kind == "elekes_unbalanced":
        params = derive_params(N, r, rational_table())
        return ClassicConstruction(kind, params.grid, params)
    if kind == "erdos_balanced":
        table = rational_table()
    elif kind == "guth_silier":
        if k is None:
            raise ValueError("guth_silier needs k")
        table = quadratic_table(k)
    else:
        raise ValueError(f"unknown construction {kind!r}")
    box = box_for_size(math.isqrt(N), table.n)
    return ClassicConstruction(kind, PointGrid(table, box, box))
