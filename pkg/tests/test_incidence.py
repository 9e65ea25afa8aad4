import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpgrids.construction import (
    ConstructionParams,
    Line,
    build_lines,
    classic_construction,
    derive_params,
    evaluate_line_at,
)
from sharpgrids.incidence import (
    ORACLE_GUARD,
    CanonicalLine,
    ConstructionViolation,
    DegeneratePairError,
    OracleGuardError,
    _count_chunk,
    canonical_form,
    count_incidences,
    count_points_on_line,
    line_through,
    on_line,
    rich_lines_oracle,
    verify_construction,
)
from sharpgrids.numberfield import IntElement, RatElement, mul, rational_table, sub

I = lambda *a: IntElement(a)  # noqa: E731
R = lambda *a: RatElement(tuple(Fraction(x) for x in a))  # noqa: E731


def int_grid(w, h):
    return [(I(x), I(y)) for x in range(w) for y in range(h)]


def collinear_sets(points, r, table):
    """Maximal collinear subsets of size >= r by cross products in K (no division)."""
    def cross_zero(p, q, s):
        a = mul(sub(q[0], p[0]), sub(s[1], p[1]), table)
        b = mul(sub(q[1], p[1]), sub(s[0], p[0]), table)
        return sub(a, b).is_zero()

    found = set()
    covered = set()
    for i, j in combinations(range(len(points)), 2):
        if (i, j) in covered:
            continue
        members = frozenset(k for k, s in enumerate(points) if cross_zero(points[i], points[j], s))
        covered.update(combinations(sorted(members), 2))
        if len(members) >= r:
            found.add(members)
    return found


def oracle_sets(points, r, table):
    return {
        frozenset(k for k, p in enumerate(points) if on_line(p, line, table))
        for line in rich_lines_oracle(points, r, table)
    }


# -- line_through / canonical forms ---------------------------------------------


def test_line_through_examples(q_table, sqrt2):
    assert line_through((I(0), I(0)), (I(1), I(1)), q_table) == CanonicalLine.sloped(I(1), I(0))
    assert line_through((I(2), I(5)), (I(2), I(9)), q_table) == CanonicalLine.vertical(I(2))
    line = line_through((I(1, 0), I(0, 0)), (I(1, 1), I(2, 1)), sqrt2)
    assert line.slope == R(1, 1)
    assert mul(line.slope, I(0, 1), sqrt2) == R(2, 1)
    with pytest.raises(DegeneratePairError):
        line_through((I(1), I(1)), (I(1), I(1)), q_table)


def test_canonical_form_matches_pair_canonicalization(sqrt2):
    line = Line(I(1, -1), I(3, 2))
    xs = [I(0, 0), I(1, 0), I(-1, 1)]
    pts = [(x, mul(line.slope, x, sqrt2) + line.intercept) for x in xs]
    for p, q in combinations(pts, 2):
        assert line_through(p, q, sqrt2) == canonical_form(line)


small_q = st.fractions(min_value=-20, max_value=20, max_denominator=7)


@settings(max_examples=200, deadline=None)
@given(small_q, small_q, small_q, small_q, small_q, small_q)
def test_canonicalization_soundness(m, b, x1, x2, x3, vx):
    t = rational_table()
    if len({x1, x2, x3}) == 3:
        pts = [(R(x), R(m * x + b)) for x in (x1, x2, x3)]
    else:
        pts = [(R(vx), R(y)) for y in (x1, x1 + 1, x1 + 2)]
    p, q, s = pts
    assert line_through(p, q, t) == line_through(q, s, t) == line_through(p, s, t)


def test_canonicalization_soundness_quadratic_field(sqrt2):
    rng = random.Random(3)
    for _ in range(50):
        m = I(rng.randint(-3, 3), rng.randint(-3, 3))
        b = I(rng.randint(-3, 3), rng.randint(-3, 3))
        xs = set()
        while len(xs) < 3:
            xs.add(I(rng.randint(-3, 3), rng.randint(-3, 3)))
        p, q, s = [(x, mul(m, x, sqrt2) + b) for x in xs]
        assert line_through(p, q, sqrt2) == line_through(q, s, sqrt2) == line_through(p, s, sqrt2)


# -- oracle -----------------------------------------------------------------


def test_oracle_three_collinear(q_table):
    pts = [(I(0), I(0)), (I(1), I(2)), (I(2), I(4))]
    assert list(rich_lines_oracle(pts, 3, q_table).values()) == [3]


def test_oracle_2x2_grid(q_table):
    found = rich_lines_oracle(int_grid(2, 2), 2, q_table)
    assert len(found) == 6
    kinds = sorted(l.kind for l in found)
    assert kinds.count("vertical") == 2


def test_oracle_3x3_grid(q_table):
    found = rich_lines_oracle(int_grid(3, 3), 3, q_table)
    assert len(found) == 8
    assert all(k == 3 for k in found.values())


@pytest.mark.parametrize("w,h,r", [(3, 3, 2), (4, 4, 3), (5, 3, 3), (4, 5, 2)])
def test_oracle_agrees_with_cross_product_grouping(q_table, w, h, r):
    pts = int_grid(w, h)
    assert oracle_sets(pts, r, q_table) == collinear_sets(pts, r, q_table)


def test_oracle_agrees_on_quadratic_grid(sqrt2):
    pts = list(classic_construction("guth_silier", 81, 2, k=2).grid.points())
    assert len(pts) == 81
    assert oracle_sets(pts, 3, sqrt2) == collinear_sets(pts, 3, sqrt2)


def test_oracle_guard(q_table):
    pts = [(I(x), I(0)) for x in range(ORACLE_GUARD + 1)]
    with pytest.raises(OracleGuardError):
        rich_lines_oracle(pts, 2, q_table)
    with pytest.raises(OracleGuardError):
        count_incidences(pts, [], q_table)


def test_oracle_rejects_duplicates(q_table):
    with pytest.raises(ValueError, match="distinct"):
        rich_lines_oracle([(I(0), I(0)), (I(0), I(0))], 2, q_table)


def test_oracle_parallel_matches_serial(q_table):
    pts = int_grid(9, 9)
    assert rich_lines_oracle(pts, 3, q_table, workers=3) == rich_lines_oracle(pts, 3, q_table)


def test_oracle_contains_constructed_lines(q_table):
    params = derive_params(16, 2, q_table)
    pts = list(params.grid.points())
    assert len(pts) == 27
    found = rich_lines_oracle(pts, params.achieved_richness, q_table)
    constructed = [canonical_form(l) for l in build_lines(params)]
    assert len(set(constructed)) == 25
    for line in constructed:
        assert found[line] == 3
    assert len(found) >= params.guaranteed_lines


def test_oracle_contains_constructed_lines_quadratic(sqrt2):
    # hand-sized n=2 family (zero slope box) small enough for the quadratic oracle
    params = ConstructionParams(81, 9, sqrt2, h_x=1, h_y=1, h_m=0, h_b=1)
    assert params.margin == 0
    assert verify_construction(params).all_rich
    pts = list(params.grid.points())
    found = rich_lines_oracle(pts, 9, sqrt2)
    for line in build_lines(params):
        assert found[canonical_form(line)] == 9


# -- richness verification ----------------------------------------------------------


def test_count_points_on_line_examples(q_table, sqrt2):
    params = derive_params(16, 2, q_table)
    assert count_points_on_line(Line(I(2), I(2)), params) == 3
    assert count_points_on_line(Line(I(0), I(0)), params) == 3
    flagship = derive_params(46656, 9, sqrt2)
    assert count_points_on_line(Line(I(0, 0), I(0, 0)), flagship) == 9
    assert count_points_on_line(flagship.line_at(777), flagship) == 9
    # a line outside the family can miss the grid
    assert count_points_on_line(Line(I(0), I(5)), params) == 0


def test_proof_chain_certificate(sqrt2):
    """Every output coordinate of m x + b stays within h_y, checked exactly per line and x."""
    params = derive_params(46656, 9, sqrt2)
    xs = [I(*x) for x in params.x_box.enumerate()]
    for line in build_lines(params):
        for x in xs:
            y = evaluate_line_at(line, x, sqrt2)
            assert max(abs(v) for v in y.coords) <= params.h_y


def test_verify_rational(q_table):
    rep = verify_construction(derive_params(16, 2, q_table))
    assert rep.lines_checked == 25
    assert rep.min_points == rep.max_points == 3
    assert rep.lines_meeting_target == 25
    assert rep.achieved_constant == Fraction(25, 32)
    assert rep.paper_constant == Fraction(1, 2)


def test_verify_flagship(sqrt2):
    rep = verify_construction(derive_params(46656, 9, sqrt2))
    assert rep.lines_checked == 12321
    assert rep.min_points == rep.max_points == 9
    assert rep.achieved_constant == Fraction(12321, 2985984)
    assert rep.paper_constant == Fraction(1, 256)


def test_fast_and_exact_paths_agree(sqrt2, cbrt2):
    for params in (derive_params(46656, 9, sqrt2), derive_params(5832 * 729 * 27, 27, cbrt2),
                   ConstructionParams(46656, 9, sqrt2, 1, 20, 1, 18)):
        idx = list(range(0, params.guaranteed_lines, max(1, params.guaranteed_lines // 500)))
        fast = _count_chunk(params, idx)
        exact = sum(count_points_on_line(params.line_at(i), params) for i in idx)
        assert fast.total == exact


def test_violation_reports_offending_line(sqrt2):
    params = derive_params(46656, 9, sqrt2)
    corrupted = ConstructionParams(params.N, params.r, sqrt2, params.h_x, 20, params.h_m, params.h_b)
    with pytest.raises(ConstructionViolation) as info:
        verify_construction(corrupted)
    err = info.value
    assert count_points_on_line(err.line, corrupted) == err.count < 9
    assert err.line == corrupted.line_at(err.index)
    # it is the first bad line in index order
    assert all(count_points_on_line(corrupted.line_at(i), corrupted) == 9 for i in range(err.index))


def test_verify_deterministic_across_workers(sqrt2, cbrt2):
    params = derive_params(46656, 9, sqrt2)
    base = verify_construction(params, workers=1).to_dict()
    assert verify_construction(params, workers=3).to_dict() == base
    cubic = derive_params(5832 * 729 * 27, 27, cbrt2)
    s1 = verify_construction(cubic, sample_size=5000, seed=11, workers=1).to_dict()
    assert verify_construction(cubic, sample_size=5000, seed=11, workers=2).to_dict() == s1
    assert s1["sampled"] and s1["seed"] == 11


def test_sampled_subset_of_full(q_table):
    params = derive_params(4000, 5, q_table)
    assert params.guaranteed_lines == 161 * 401
    full = verify_construction(params)
    sample = verify_construction(params, sample_size=100, seed=5)
    assert sample.lines_checked == 100 and full.lines_checked == params.guaranteed_lines
    assert full.all_rich and sample.all_rich
    big = verify_construction(params, sample_size=10**6)
    assert not big.sampled and big.to_dict() == full.to_dict()


# -- incidences ---------------------------------------------------------------


def test_count_incidences_examples(q_table):
    assert count_incidences([(I(0), I(0))], [Line(I(1), I(0))], q_table) == 1
    assert count_incidences([(I(0), I(0))], [], q_table) == 0
    params = derive_params(16, 2, q_table)
    pts = list(params.grid.points())
    assert count_incidences(pts, build_lines(params), q_table) == 75


def test_incidence_symmetry(q_table):
    pts = int_grid(4, 4)
    lines = list(rich_lines_oracle(pts, 2, q_table))
    assert count_incidences(pts, lines, q_table, "line") == count_incidences(pts, lines, q_table, "point")
    # sum over lines of C(k, 2) counts every point pair exactly once
    per_line = [sum(on_line(p, l, q_table) for p in pts) for l in lines]
    assert sum(k * (k - 1) // 2 for k in per_line) == len(pts) * (len(pts) - 1) // 2
