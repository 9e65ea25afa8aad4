from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpgrids.construction import (
    ConstructionParams,
    HypothesisError,
    Line,
    ParametersTooSmallError,
    build_lines,
    classic_construction,
    derive_params,
    evaluate_line_at,
    is_squarefree,
)
from sharpgrids.numberfield import DimensionError, IntElement, power_basis_table, rational_table

I = lambda *a: IntElement(a)  # noqa: E731

FLAGSHIP = (46656, 9)
CUBIC_N = 5832 * 729 * 27


def test_flagship_params(sqrt2):
    p = derive_params(*FLAGSHIP, sqrt2)
    assert (p.h_x, p.h_y, p.h_m, p.h_b) == (1, 36, 1, 18)
    assert p.guaranteed_lines == 12321
    assert p.paper_lines == 11664
    assert 4 * 2 * 1 * 1 + 18 == 26 <= 36
    assert p.margin == 36 - 26
    assert not p.degenerate


def test_rational_params(q_table):
    p = derive_params(16, 2, q_table)
    assert (p.h_x, p.h_y, p.h_m, p.h_b) == (1, 4, 2, 2)
    assert p.guaranteed_lines == 25
    assert p.margin == 0
    assert p.paper_lines == 16


def test_cubic_params(cbrt2):
    p = derive_params(CUBIC_N, 27, cbrt2)
    assert (p.h_x, p.h_y, p.h_m, p.h_b) == (1, 81, 1, 40)
    assert p.margin == 81 - (9 * 2 * 1 * 1 + 40)
    assert not p.degenerate
    # floored cube roots make the slope box non-trivial from argument 8 on
    assert derive_params(5832 * 729 * 8, 27, cbrt2).h_m == 1
    assert derive_params(5832 * 729 * 8 - 1, 27, cbrt2).degenerate


def test_hypothesis_violation(q_table):
    with pytest.raises(HypothesisError):
        derive_params(100, 11, q_table)


def test_parameters_too_small(sqrt2):
    with pytest.raises(ParametersTooSmallError):
        derive_params(100, 2, sqrt2)


def test_degenerate_flag(q_table):
    p = derive_params(16, 4, q_table)
    assert p.h_m == 0 and p.degenerate
    assert p.to_dict()["degenerate"] is True


@pytest.mark.parametrize("s", [1, 3, 5])
def test_guaranteed_matches_paper_in_exact_regime(cbrt2, s):
    # r = 3^3 and slope/intercept arguments s^3, (27s)^3 are odd cubes: no floor loss on lines
    N = 5832 * 729 * s**3
    p = derive_params(N, 27, cbrt2)
    assert p.achieved_richness == 27
    assert p.slope_box.cardinality == s**3
    assert p.intercept_box.cardinality == (27 * s) ** 3
    assert p.guaranteed_lines >= p.paper_lines
    assert p.guaranteed_lines == p.paper_lines


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10**12), st.integers(1, 1000), st.sampled_from(["q", "sqrt2", "cbrt2"]))
def test_richness_condition_never_fails(N, r, which):
    table = {"q": rational_table(),
             "sqrt2": power_basis_table([-2, 0, 1], 2**0.5),
             "cbrt2": power_basis_table([-2, 0, 0, 1], 2 ** (1 / 3))}[which]
    if r * r > N:
        with pytest.raises(HypothesisError):
            derive_params(N, r, table)
        return
    try:
        p = derive_params(N, r, table)
    except ParametersTooSmallError:
        return
    assert p.margin >= 0


def test_build_lines_trivial(q_table):
    p = ConstructionParams(1, 1, q_table, 0, 0, 0, 0)
    assert list(build_lines(p)) == [Line(I(0), I(0))]


def test_build_lines_rational(q_table):
    p = derive_params(16, 2, q_table)
    lines = list(build_lines(p))
    assert len(lines) == 25
    assert {l.slope.coords[0] for l in lines} == set(range(-2, 3))
    assert {l.intercept.coords[0] for l in lines} == set(range(-2, 3))
    assert lines[0] == Line(I(-2), I(-2))


def test_build_lines_flagship(sqrt2):
    p = derive_params(*FLAGSHIP, sqrt2)
    lines = list(build_lines(p))
    assert len(lines) == p.guaranteed_lines == 9 * 1369
    assert len(set(lines)) == len(lines)
    for i in (0, 1, 1368, 1369, 5000, 12320):
        assert p.line_at(i) == lines[i]


def test_evaluate_line_at(sqrt2, q_table):
    b = I(4, -1)
    assert evaluate_line_at(Line(I(0, 0), b), I(3, 3), sqrt2) == b
    assert evaluate_line_at(Line(I(1, 1), I(0, 0)), I(1, 1), sqrt2) == I(3, 2)
    assert evaluate_line_at(Line(I(2), I(-1)), I(3), q_table) == I(5)
    with pytest.raises(DimensionError):
        evaluate_line_at(Line(I(2), I(-1)), I(3, 1), q_table)


def test_elekes_equals_rational_derivation(q_table):
    for N in range(1, 400):
        for r in range(1, 21):
            if r * r > N:
                continue
            try:
                direct = derive_params(N, r, q_table)
            except ParametersTooSmallError:
                continue
            assert classic_construction("elekes_unbalanced", N, r).params == direct


def test_erdos_balanced():
    c = classic_construction("erdos_balanced", 25, 2)
    assert c.params is None
    assert c.grid.table.n == 1
    assert c.grid.x_box.h == c.grid.y_box.h == 2
    assert c.grid.point_count == 25


def test_guth_silier():
    c = classic_construction("guth_silier", 1296, 3, k=2)
    assert c.grid.table.n == 2
    assert c.grid.x_box.h == 3  # floor(sqrt(36)) // 2
    with pytest.raises(ValueError, match="square-free"):
        classic_construction("guth_silier", 1296, 3, k=4)
    with pytest.raises(HypothesisError):
        classic_construction("erdos_balanced", 10, 4)


def test_is_squarefree():
    assert [k for k in range(1, 20) if is_squarefree(k)] == [1, 2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19]


def test_params_roundtrip(sqrt2):
    p = derive_params(*FLAGSHIP, sqrt2)
    assert ConstructionParams.from_dict(p.to_dict(), sqrt2) == p
    assert p.paper_constant == Fraction(1, 256)
