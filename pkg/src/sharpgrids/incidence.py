"""Richness verification, incidence counting and the brute-force oracle.

Everything here is symbolic: a point (x, y) of K^2 lies on y = m x + b in the
real plane iff the identity holds in K, and membership in a coefficient box
is an integer comparison.  Floating point never enters a verdict.
"""

from __future__ import annotations

import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from .construction import ConstructionParams, Line, evaluate_line_at
from .numberfield import (
    Element,
    IntElement,
    RatElement,
    StructureTable,
    _check_dims,
    as_rat,
    invert,
    mul,
)

ORACLE_GUARD = 20_000
DEFAULT_SEED = 20240501
_INT64_SAFE = 1 << 62
_BATCH = 4096

Point = tuple[Element, Element]


class ConstructionViolation(AssertionError):
    """A constructed line does not pass through every expected grid point."""

    def __init__(self, index: int, line: Line, count: int, expected: int) -> None:
        self.index = index
        self.line = line
        self.count = count
        self.expected = expected
        super().__init__(
            f"line #{index} slope={list(line.slope.coords)} intercept={list(line.intercept.coords)} "
            f"meets {count} grid points, expected {expected}"
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": "construction_violation",
            "line_index": self.index,
            "slope": list(self.line.slope.coords),
            "intercept": list(self.line.intercept.coords),
            "count": self.count,
            "expected": self.expected,
        }


class OracleGuardError(ValueError):
    """Too many points for quadratic pair enumeration."""


class DegeneratePairError(ValueError):
    pass


# ---------------------------------------------------------------------------
# canonical lines
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CanonicalLine:
    kind: str  # "sloped" or "vertical"
    slope: RatElement | None = None
    intercept: RatElement | None = None
    x0: RatElement | None = None

    @classmethod
    def sloped(cls, slope: Element, intercept: Element) -> CanonicalLine:
        return cls("sloped", as_rat(slope), as_rat(intercept))

    @classmethod
    def vertical(cls, x0: Element) -> CanonicalLine:
        return cls("vertical", x0=as_rat(x0))

    def sort_key(self) -> tuple:
        if self.kind == "vertical":
            return (1, self.x0.coords, ())
        return (0, self.slope.coords, self.intercept.coords)


def canonical_form(line: Line) -> CanonicalLine:
    return CanonicalLine.sloped(line.slope, line.intercept)


def line_through(p: Point, q: Point, table: StructureTable, _inverse_cache: dict | None = None) -> CanonicalLine:
    xp, yp = as_rat(p[0]), as_rat(p[1])
    xq, yq = as_rat(q[0]), as_rat(q[1])
    _check_dims(xp, yp, xq, yq, table.n)
    if xp == xq:
        if yp == yq:
            raise DegeneratePairError(f"points coincide: ({xp}, {yp})")
        return CanonicalLine.vertical(xp)
    dx = xq - xp
    if _inverse_cache is None:
        inv = invert(dx, table)
    else:
        inv = _inverse_cache.get(dx)
        if inv is None:
            inv = _inverse_cache[dx] = invert(dx, table)
    slope = mul(yq - yp, inv, table)
    intercept = yp - mul(slope, xp, table)
    return CanonicalLine.sloped(slope, intercept)


def on_line(point: Point, line: CanonicalLine | Line, table: StructureTable) -> bool:
    if isinstance(line, Line):
        line = canonical_form(line)
    x, y = as_rat(point[0]), as_rat(point[1])
    if line.kind == "vertical":
        return x == line.x0
    return y == as_rat(mul(line.slope, x, table) + line.intercept)


# ---------------------------------------------------------------------------
# verifying constructed lines
# ---------------------------------------------------------------------------


def count_points_on_line(line: Line, params: ConstructionParams) -> int:
    """Grid points on ``line``: x ranges over the x box, y' = m x + b must lie in the y box."""
    table, y_box = params.table, params.y_box
    _check_dims(line.slope, line.intercept, table.n)
    return sum(
        y_box.contains(evaluate_line_at(line, IntElement(x), table).coords)
        for x in params.x_box.enumerate()
    )


@dataclass
class RichnessReport:
    lines_checked: int
    min_points: int
    max_points: int
    mean_points: Fraction
    lines_meeting_target: int
    target_r: int
    achieved_richness: int
    total_lines: int
    sampled: bool
    seed: int | None
    achieved_constant: Fraction
    paper_constant: Fraction
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def all_rich(self) -> bool:
        return self.lines_meeting_target == self.lines_checked

    def to_dict(self) -> dict[str, Any]:
        frac = lambda q: f"{q.numerator}/{q.denominator}"  # noqa: E731
        return {
            "lines_checked": self.lines_checked,
            "total_lines": self.total_lines,
            "sampled": self.sampled,
            "seed": self.seed,
            "min_points": self.min_points,
            "max_points": self.max_points,
            "mean_points": frac(self.mean_points),
            "target_r": self.target_r,
            "achieved_richness": self.achieved_richness,
            "lines_meeting_target": self.lines_meeting_target,
            "achieved_constant": frac(self.achieved_constant),
            "paper_constant": frac(self.paper_constant),
            "achieved_at_least_paper": self.achieved_constant >= self.paper_constant,
            "params": self.params,
        }


@dataclass
class _Partial:
    checked: int = 0
    lo: int | None = None
    hi: int | None = None
    total: int = 0
    meeting: int = 0
    bad_index: int | None = None
    bad_count: int | None = None

    def merge(self, other: _Partial) -> None:
        self.checked += other.checked
        self.total += other.total
        self.meeting += other.meeting
        if other.lo is not None:
            self.lo = other.lo if self.lo is None else min(self.lo, other.lo)
            self.hi = other.hi if self.hi is None else max(self.hi, other.hi)
        if other.bad_index is not None and (self.bad_index is None or other.bad_index < self.bad_index):
            self.bad_index, self.bad_count = other.bad_index, other.bad_count


def _fits_int64(params: ConstructionParams) -> bool:
    n = params.n
    bound = n * n * params.c_lambda * params.h_m * params.h_x + params.h_b
    return max(bound, params.h_y, params.guaranteed_lines) < _INT64_SAFE


def _decode(idx: np.ndarray, box_side: int, h: int, n: int) -> np.ndarray:
    out = np.empty((idx.shape[0], n), dtype=np.int64)
    rest = idx.copy()
    for col in range(n - 1, -1, -1):
        out[:, col] = rest % box_side - h
        rest //= box_side
    return out


def _line_counts_numpy(params: ConstructionParams, indices: np.ndarray) -> np.ndarray:
    n = params.n
    c = np.array(params.table.c, dtype=np.int64)
    xs = np.array(list(params.x_box.enumerate()), dtype=np.int64)
    per_slope = params.intercept_box.cardinality
    slopes = _decode(indices // per_slope, params.slope_box.side, params.h_m, n)
    intercepts = _decode(indices % per_slope, params.intercept_box.side, params.h_b, n)
    # rep[b, k, j] = sum_i m_i c[i, j, k]: the matrix of multiplication by the slope
    rep = np.einsum("bi,ijk->bkj", slopes, c)
    ys = np.einsum("bkj,xj->bxk", rep, xs) + intercepts[:, None, :]
    inside = (np.abs(ys) <= params.h_y).all(axis=2)
    return inside.sum(axis=1)


def _count_chunk(params: ConstructionParams, indices: Sequence[int]) -> _Partial:
    part = _Partial()
    expected = params.achieved_richness
    if _fits_int64(params):
        arr = np.asarray(indices, dtype=np.int64)
        # keep the (batch, |X|, n) intermediate near 2^21 entries
        batch = max(1, min(_BATCH, (1 << 21) // (params.achieved_richness * params.n)))
        for start in range(0, arr.shape[0], batch):
            chunk = arr[start:start + batch]
            ks = _line_counts_numpy(params, chunk)
            bad = np.flatnonzero(ks != expected)
            part.merge(_Partial(
                checked=int(ks.shape[0]),
                lo=int(ks.min()),
                hi=int(ks.max()),
                total=int(ks.sum()),
                meeting=int((ks >= params.r).sum()),
                bad_index=int(chunk[bad[0]]) if bad.size else None,
                bad_count=int(ks[bad[0]]) if bad.size else None,
            ))
        return part
    for i in indices:
        k = count_points_on_line(params.line_at(i), params)
        part.merge(_Partial(1, k, k, k, int(k >= params.r),
                            i if k != expected else None, k if k != expected else None))
    return part


def _count_range(params: ConstructionParams, start: int, stop: int) -> _Partial:
    part = _Partial()
    step = _BATCH * 16
    for lo in range(start, stop, step):
        hi = min(stop, lo + step)
        if _fits_int64(params):
            part.merge(_count_chunk(params, np.arange(lo, hi, dtype=np.int64)))
        else:
            part.merge(_count_chunk(params, range(lo, hi)))
    return part


def _sample_indices(total: int, size: int, seed: int) -> list[int]:
    return sorted(random.Random(seed).sample(range(total), size))


def verify_construction(
    params: ConstructionParams,
    sample_size: int | None = None,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> RichnessReport:
    """Check that every (or a seeded uniform sample of) constructed line is rich.

    Each line must meet exactly (2 h_x + 1)^n grid points; the first offending
    line in index order raises :class:`ConstructionViolation`.  The report does
    not depend on ``workers``.
    """
    total = params.guaranteed_lines
    sampled = sample_size is not None and sample_size < total
    workers = max(1, int(workers))

    if sampled:
        indices = _sample_indices(total, sample_size, seed)
        chunks = [indices[i:i + _BATCH * 4] for i in range(0, len(indices), _BATCH * 4)]
        jobs = [(_count_chunk, (params, ch)) for ch in chunks]
    else:
        n_chunks = max(1, min(workers * 4, total // _BATCH + 1))
        bounds = [total * k // n_chunks for k in range(n_chunks + 1)]
        jobs = [(_count_range, (params, a, b)) for a, b in zip(bounds, bounds[1:]) if b > a]

    result = _Partial()
    if workers == 1 or len(jobs) == 1:
        for fn, args in jobs:
            result.merge(fn(*args))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn, *args) for fn, args in jobs]
            for fut in futures:
                result.merge(fut.result())

    if result.bad_index is not None:
        raise ConstructionViolation(
            result.bad_index, params.line_at(result.bad_index), result.bad_count, params.achieved_richness
        )
    return RichnessReport(
        lines_checked=result.checked,
        min_points=result.lo or 0,
        max_points=result.hi or 0,
        mean_points=Fraction(result.total, result.checked) if result.checked else Fraction(0),
        lines_meeting_target=result.meeting,
        target_r=params.r,
        achieved_richness=params.achieved_richness,
        total_lines=total,
        sampled=sampled,
        seed=seed if sampled else None,
        achieved_constant=Fraction(total * params.r**3, params.N**2),
        paper_constant=params.paper_constant,
        params=params.to_dict(),
    )


# ---------------------------------------------------------------------------
# pair-enumeration oracle
# ---------------------------------------------------------------------------


def _guard(points: Sequence[Point]) -> None:
    if len(points) > ORACLE_GUARD:
        raise OracleGuardError(f"{len(points)} points exceed the oracle guard of {ORACLE_GUARD}")


def _lines_from_anchor(points: Sequence[Point], table: StructureTable, r: int, anchors: range) -> dict:
    found: dict[CanonicalLine, int] = {}
    cache: dict = {}
    for i in anchors:
        counts: Counter = Counter()
        earlier: set = set()
        p = points[i]
        for j, q in enumerate(points):
            if j == i:
                continue
            line = line_through(p, q, table, cache)
            counts[line] += 1
            if j < i:
                earlier.add(line)
        # each line is reported by its lowest-index point only
        for line, k in counts.items():
            if k + 1 >= r and line not in earlier:
                found[line] = k + 1
    return found


def rich_lines_oracle(
    points: Sequence[Point], r: int, table: StructureTable, workers: int = 1
) -> dict[CanonicalLine, int]:
    """Every line through at least ``r`` of ``points``, with its point count.

    Exhaustive over all pairs; quadratic, so refuses more than
    ``ORACLE_GUARD`` points.  For r <= 1 only lines through two or more
    points are reported.
    """
    _guard(points)
    pts = [(as_rat(x), as_rat(y)) for x, y in points]
    if len(set(pts)) != len(pts):
        raise ValueError("oracle points must be pairwise distinct")
    total = len(pts)
    workers = max(1, int(workers))
    if workers == 1 or total < 64:
        found = _lines_from_anchor(pts, table, r, range(total))
    else:
        n_chunks = workers * 4
        bounds = [total * k // n_chunks for k in range(n_chunks + 1)]
        found = {}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_lines_from_anchor, pts, table, r, range(a, b))
                       for a, b in zip(bounds, bounds[1:]) if b > a]
            for fut in futures:
                found.update(fut.result())
    return dict(sorted(found.items(), key=lambda kv: kv[0].sort_key()))


def count_incidences(
    points: Sequence[Point],
    lines: Iterable[Line | CanonicalLine],
    table: StructureTable,
    order: str = "line",
) -> int:
    """Number of (point, line) pairs with the point on the line."""
    _guard(points)
    canon = [canonical_form(l) if isinstance(l, Line) else l for l in lines]
    if order == "line":
        return sum(sum(on_line(p, l, table) for p in points) for l in canon)
    if order == "point":
        return sum(sum(on_line(p, l, table) for l in canon) for p in points)
    raise ValueError(f"order must be 'line' or 'point', not {order!r}")
