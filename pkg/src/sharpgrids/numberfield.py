"""Exact arithmetic in a number field given by integer structure constants.

A field K of degree n over Q is presented by a basis lambda_1..lambda_n and
the integers c[i][j][k] with lambda_i * lambda_j = sum_k c[i][j][k] lambda_k.
Elements are coordinate vectors in that basis.  Integer coordinates live in
:class:`IntElement`, rational ones in :class:`RatElement`; both are immutable
and hash by value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

ROOT_TOLERANCE = 1e-6
EMBEDDING_RTOL = 1e-9


class DimensionError(ValueError):
    pass


class NotAFieldError(ArithmeticError):
    """A nonzero element has a singular multiplication matrix."""


class SpecError(ValueError):
    """A basis specification could not be read or failed validation."""


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntElement:
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        coords = tuple(self.coords)
        for a in coords:
            if isinstance(a, bool) or not isinstance(a, int):
                raise TypeError(f"integer coordinate expected, got {a!r}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def zero(cls, n: int) -> IntElement:
        return cls((0,) * n)

    @property
    def n(self) -> int:
        return len(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def to_rat(self) -> RatElement:
        return RatElement(tuple(Fraction(a) for a in self.coords))

    def __add__(self, other: Element) -> Element:
        return add(self, other)

    def __sub__(self, other: Element) -> Element:
        return sub(self, other)

    def __neg__(self) -> IntElement:
        return IntElement(tuple(-a for a in self.coords))

    def __str__(self) -> str:
        return "(" + ", ".join(str(a) for a in self.coords) + ")"


@dataclass(frozen=True)
class RatElement:
    coords: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        # Fraction normalizes to lowest terms with a positive denominator.
        object.__setattr__(self, "coords", tuple(Fraction(a) for a in self.coords))

    @classmethod
    def zero(cls, n: int) -> RatElement:
        return cls((Fraction(0),) * n)

    @property
    def n(self) -> int:
        return len(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.coords)

    def to_int(self) -> IntElement:
        if not self.is_integral():
            raise ValueError(f"{self} has non-integral coordinates")
        return IntElement(tuple(a.numerator for a in self.coords))

    def to_rat(self) -> RatElement:
        return self

    def __add__(self, other: Element) -> RatElement:
        return add(self, other)

    def __sub__(self, other: Element) -> RatElement:
        return sub(self, other)

    def __neg__(self) -> RatElement:
        return RatElement(tuple(-a for a in self.coords))

    def __str__(self) -> str:
        return "(" + ", ".join(str(a) for a in self.coords) + ")"


Element = Union[IntElement, RatElement]


def as_rat(x: Element) -> RatElement:
    return x if isinstance(x, RatElement) else x.to_rat()


def _check_dims(*xs: Element | int) -> int:
    dims = {x if isinstance(x, int) else x.n for x in xs}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def _wrap(coords: Iterable, rational: bool) -> Element:
    return RatElement(tuple(coords)) if rational else IntElement(tuple(coords))


def add(x: Element, y: Element) -> Element:
    _check_dims(x, y)
    rational = isinstance(x, RatElement) or isinstance(y, RatElement)
    return _wrap((a + b for a, b in zip(x.coords, y.coords)), rational)


def sub(x: Element, y: Element) -> Element:
    _check_dims(x, y)
    rational = isinstance(x, RatElement) or isinstance(y, RatElement)
    return _wrap((a - b for a, b in zip(x.coords, y.coords)), rational)


def neg(x: Element) -> Element:
    return -x


def scale(x: Element, s: int | Fraction) -> Element:
    rational = isinstance(x, RatElement) or isinstance(s, Fraction)
    return _wrap((s * a for a in x.coords), rational)


# ---------------------------------------------------------------------------
# structure tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinimalPolynomial:
    """Monic integer polynomial, coefficients listed from constant term up."""

    coefficients: tuple[int, ...]

    def __post_init__(self) -> None:
        coeffs = tuple(self.coefficients)
        for a in coeffs:
            if isinstance(a, bool) or not isinstance(a, int):
                raise TypeError(f"integer coefficient expected, got {a!r}")
        if len(coeffs) < 2:
            raise ValueError("polynomial must have degree >= 1")
        if coeffs[-1] != 1:
            raise ValueError(f"polynomial is not monic (leading coefficient {coeffs[-1]})")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x: float) -> float:
        acc = 0.0
        for a in reversed(self.coefficients):
            acc = acc * x + a
        return acc

    def derivative_at(self, x: float) -> float:
        acc = 0.0
        for i in range(self.degree, 0, -1):
            acc = acc * x + i * self.coefficients[i]
        return acc


@dataclass(frozen=True)
class StructureTable:
    n: int
    c: tuple[tuple[tuple[int, ...], ...], ...]
    unity: IntElement
    embedding: tuple[float, ...]

    def __post_init__(self) -> None:
        n = self.n
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ValueError(f"dimension must be a positive integer, got {n!r}")
        try:
            c = tuple(tuple(tuple(_as_int(v) for v in row) for row in plane) for plane in self.c)
        except TypeError as exc:
            raise ValueError(f"malformed structure constants: {exc}") from None
        if len(c) != n or any(len(p) != n or any(len(row) != n for row in p) for p in c):
            raise ValueError(f"structure constants must have shape {n}x{n}x{n}")
        unity = self.unity if isinstance(self.unity, IntElement) else IntElement(tuple(self.unity))
        if unity.n != n:
            raise ValueError(f"unity has length {unity.n}, expected {n}")
        embedding = tuple(float(e) for e in self.embedding)
        if len(embedding) != n:
            raise ValueError(f"embedding has length {len(embedding)}, expected {n}")
        if not all(math.isfinite(e) for e in embedding):
            raise ValueError("embedding values must be finite reals")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "unity", unity)
        object.__setattr__(self, "embedding", embedding)

    @cached_property
    def nonzero_terms(self) -> tuple[tuple[int, int, int, int], ...]:
        """(i, j, k, c_ijk) for every nonzero structure constant."""
        n = self.n
        return tuple(
            (i, j, k, self.c[i][j][k])
            for i, j, k in product(range(n), repeat=3)
            if self.c[i][j][k]
        )

    def basis_vector(self, i: int) -> IntElement:
        return IntElement(tuple(int(k == i) for k in range(self.n)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "table",
            "n": self.n,
            "c": [[list(row) for row in plane] for plane in self.c],
            "unity": list(self.unity.coords),
            "embedding": list(self.embedding),
        }


def _as_int(v: Any) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError(f"non-integer structure constant {v!r}")
    return v


def rational_table() -> StructureTable:
    """The one-dimensional table of Q itself, basis {1}."""
    return StructureTable(1, (((1,),),), IntElement((1,)), (1.0,))


def _polish_root(p: MinimalPolynomial, x: float) -> float:
    for _ in range(50):
        d = p.derivative_at(x)
        if d == 0:
            break
        step = p(x) / d
        x_new = x - step
        if x_new == x or abs(step) <= 1e-17 * max(1.0, abs(x)):
            return x_new
        x = x_new
    return x


def power_basis_table(p: MinimalPolynomial | Sequence[int], alpha_approx: float) -> StructureTable:
    """Table of the basis 1, alpha, ..., alpha^(n-1) for a root alpha of ``p``.

    ``alpha_approx`` must satisfy |p(alpha_approx)| <= 1e-6.  It is then
    Newton-polished so the stored embedding is accurate to double precision.
    """
    if not isinstance(p, MinimalPolynomial):
        p = MinimalPolynomial(tuple(p))
    alpha = float(alpha_approx)
    residual = p(alpha)
    if not math.isfinite(residual) or abs(residual) > ROOT_TOLERANCE:
        raise ValueError(f"alpha={alpha_approx!r} is not a root of the polynomial (residual {residual:.3g})")
    alpha = _polish_root(p, alpha)

    n = p.degree
    low = p.coefficients[:-1]
    # powers[e] = coordinates of alpha^e reduced mod p, for e = 0..2n-2
    powers = [[1] + [0] * (n - 1)] if n > 1 else [[1]]
    for _ in range(2 * n - 2):
        prev = powers[-1]
        top = prev[-1]
        shifted = [0] + prev[:-1]
        powers.append([s - top * a for s, a in zip(shifted, low)])
    c = tuple(tuple(tuple(powers[i + j]) for j in range(n)) for i in range(n))
    unity = IntElement(tuple(int(k == 0) for k in range(n)))
    embedding = tuple(alpha**i for i in range(n))
    return StructureTable(n, c, unity, embedding)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    symmetry: bool
    associativity: bool
    unity: bool
    embedding: bool
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.symmetry and self.associativity and self.unity and self.embedding

    def to_dict(self) -> dict[str, Any]:
        return {
            "pass": self.passed,
            "symmetry": self.symmetry,
            "associativity": self.associativity,
            "unity": self.unity,
            "embedding": self.embedding,
            "failures": list(self.failures),
        }


def validate_table(t: StructureTable) -> ValidationReport:
    """Check commutativity, associativity, the unity law and the embedding.

    By bilinearity it suffices to test the laws on basis vectors, so every
    check here is exhaustive.  Failures are collected, never raised.
    """
    n, c = t.n, t.c
    failures: list[str] = []
    rng = range(n)

    sym = True
    for i, j, k in product(rng, repeat=3):
        if c[i][j][k] != c[j][i][k]:
            sym = False
            failures.append(f"symmetry: c[{i}][{j}][{k}]={c[i][j][k]} != c[{j}][{i}][{k}]={c[j][i][k]}")

    assoc = True
    for i, j, k in product(rng, repeat=3):
        # (l_i l_j) l_k and l_i (l_j l_k), coordinate q
        for q in rng:
            left = sum(c[i][j][s] * c[s][k][q] for s in rng)
            right = sum(c[j][k][s] * c[i][s][q] for s in rng)
            if left != right:
                assoc = False
                failures.append(f"associativity: basis triple ({i},{j},{k}) differs at coordinate {q}")
                break

    unity_ok = True
    for j in rng:
        prod_ = mul(t.unity, t.basis_vector(j), t)
        if prod_ != t.basis_vector(j):
            unity_ok = False
            failures.append(f"unity: unity * lambda_{j} = {prod_}")

    emb = t.embedding
    emb_ok = True
    for i, j in product(rng, repeat=2):
        expect = emb[i] * emb[j]
        got = math.fsum(c[i][j][k] * emb[k] for k in rng)
        if abs(got - expect) > EMBEDDING_RTOL * max(1.0, abs(expect)):
            emb_ok = False
            failures.append(f"embedding: lambda_{i}*lambda_{j}: {expect!r} vs table {got!r}")
    if emb_ok:
        e1 = embed(t.unity, t)
        if abs(e1 - 1.0) > EMBEDDING_RTOL:
            emb_ok = False
            failures.append(f"embedding: unity embeds to {e1!r}")

    return ValidationReport(sym, assoc, unity_ok, emb_ok, failures)


def c_lambda(t: StructureTable) -> int:
    return max(abs(v) for plane in t.c for row in plane for v in row)


# ---------------------------------------------------------------------------
# multiplication, inversion, embedding
# ---------------------------------------------------------------------------


def mul(x: Element, y: Element, t: StructureTable) -> Element:
    _check_dims(x, y, t.n)
    xs, ys = x.coords, y.coords
    out = [0] * t.n
    for i, j, k, cijk in t.nonzero_terms:
        xi, yj = xs[i], ys[j]
        if xi and yj:
            out[k] += xi * yj * cijk
    rational = isinstance(x, RatElement) or isinstance(y, RatElement)
    return _wrap(out, rational)


def representation_matrix(x: Element, t: StructureTable) -> list[list[Fraction]]:
    """Matrix of y -> x*y; column j holds the coordinates of x*lambda_j."""
    _check_dims(x, t.n)
    x = as_rat(x)
    n = t.n
    m = [[Fraction(0)] * n for _ in range(n)]
    for i, j, k, cijk in t.nonzero_terms:
        m[k][j] += x.coords[i] * cijk
    return m


def bareiss_solve(a: Sequence[Sequence[int]], b: Sequence[int]) -> list[Fraction]:
    """Solve the integer system a z = b exactly by fraction-free elimination.

    Raises ``ZeroDivisionError`` if ``a`` is singular.
    """
    n = len(a)
    m = [list(row) + [rhs] for row, rhs in zip(a, b)]
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for s in range(k + 1, n):
                if m[s][k] != 0:
                    m[k], m[s] = m[s], m[k]
                    break
            else:
                raise ZeroDivisionError("singular matrix")
        pivot = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, n + 1):
                row_i[j] = (row_i[j] * pivot - mik * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    if m[n - 1][n - 1] == 0:
        raise ZeroDivisionError("singular matrix")

    z = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(m[i][n])
        for j in range(i + 1, n):
            acc -= m[i][j] * z[j]
        z[i] = acc / m[i][i]
    return z


def invert(x: Element, t: StructureTable) -> RatElement:
    _check_dims(x, t.n)
    x = as_rat(x)
    if x.is_zero():
        raise ZeroDivisionError("cannot invert the zero element")
    denom = math.lcm(*(a.denominator for a in x.coords))
    # x = x_int / denom, so 1/x = denom * (1/x_int)
    x_int = RatElement(tuple(a * denom for a in x.coords))
    mat = [[int(v) for v in row] for row in representation_matrix(x_int, t)]
    try:
        z = bareiss_solve(mat, t.unity.coords)
    except ZeroDivisionError:
        raise NotAFieldError(f"{x} is nonzero but not invertible; the table is not a field") from None
    return RatElement(tuple(denom * v for v in z))


def div(x: Element, y: Element, t: StructureTable) -> RatElement:
    return as_rat(mul(x, invert(y, t), t))


def embed(x: Element, t: StructureTable) -> float:
    _check_dims(x, t.n)
    return math.fsum(float(a) * e for a, e in zip(x.coords, t.embedding))


# ---------------------------------------------------------------------------
# basis specification files
# ---------------------------------------------------------------------------


def table_from_spec(spec: dict[str, Any], validate: bool = True) -> StructureTable:
    """Build (and by default validate) a table from a parsed basis specification.

    Accepted shapes::

        {"kind": "power", "min_poly": [c0, ..., 1], "alpha": float}
        {"kind": "table", "n": int, "c": [[[int]]], "unity": [int], "embedding": [float]}
    """
    if not isinstance(spec, dict):
        raise SpecError("basis spec must be a JSON object")
    kind = spec.get("kind")
    try:
        if kind == "power":
            if "alpha" not in spec:
                raise SpecError("power spec needs a real 'alpha' (complex embeddings are not supported)")
            table = power_basis_table(MinimalPolynomial(tuple(spec["min_poly"])), float(spec["alpha"]))
        elif kind == "table":
            for key in ("n", "c", "unity", "embedding"):
                if key not in spec:
                    raise SpecError(f"table spec is missing {key!r}")
            table = StructureTable(spec["n"], spec["c"], IntElement(tuple(spec["unity"])),
                                   tuple(spec["embedding"]))
        else:
            raise SpecError(f"unknown basis kind {kind!r}")
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed {kind} spec: {exc}") from None
    if not validate:
        return table
    report = validate_table(table)
    if not report.passed:
        raise SpecError("basis table failed validation: " + "; ".join(report.failures[:5]))
    return table


def load_basis_spec(path: str | Path, validate: bool = True) -> StructureTable:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read spec {path}: {exc.strerror or exc}") from None
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec {path} is not valid JSON: {exc}") from None
    return table_from_spec(spec, validate=validate)
