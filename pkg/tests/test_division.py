import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from btparam.curve import ArcSpan, arc_diameter, curve_from_points, remetrize_dd
from btparam.division import DEFAULT_TOL, _Walker, equal_diameter_division, smallest_count_below
from btparam.errors import DegenerateSpan, NoConvergence
from btparam.generators import fixture

import helpers

WHOLE = ArcSpan(0.0, 0.0, wraps=True)


def assert_valid(curve, span, res, N, tol=DEFAULT_TOL):
    u0, u1 = span.unrolled()
    assert res.count == N
    assert res.positions[0] == u0 and res.positions[-1] == u1
    assert np.all(np.diff(res.positions) > 0)
    assert len(res.breakpoints) == N - 1
    # piece diameters recomputed independently of the division code
    diams = [arc_diameter(curve, piece) for piece in res.pieces()]
    np.testing.assert_allclose(diams, res.diameters, rtol=1e-12)
    assert max(diams) - min(diams) <= tol * res.common_diameter
    assert res.residual <= tol * res.common_diameter


def test_segment_quarters():
    seg = fixture("segment")
    res = equal_diameter_division(seg, ArcSpan(0.0, 1.0), 4)
    np.testing.assert_allclose(res.breakpoints, [0.25, 0.5, 0.75], atol=1e-9)
    assert res.common_diameter == pytest.approx(0.25, abs=1e-9)


def test_circle_quarters():
    c = helpers.curve("circle-256")
    res = equal_diameter_division(c, WHOLE, 4)
    np.testing.assert_allclose(res.breakpoints, [0.25, 0.5, 0.75], atol=1e-6)
    assert res.common_diameter == pytest.approx(math.sqrt(2), rel=DEFAULT_TOL)
    assert_valid(c, WHOLE, res, 4)


def test_l_arc_halves_at_corner():
    c = fixture("l_arc")
    # oracle: grid search for the cut balancing both diameters
    grid = np.linspace(0.0, 1.0, 20001)[1:-1]
    gaps = [abs(arc_diameter(c, ArcSpan(0.0, u)) - arc_diameter(c, ArcSpan(u, 1.0))) for u in grid]
    best = grid[int(np.argmin(gaps))]
    assert best == pytest.approx(0.5, abs=1e-4)
    res = equal_diameter_division(c, ArcSpan(0.0, 1.0), 2)
    assert res.breakpoints[0] == pytest.approx(0.5, abs=1e-6)
    np.testing.assert_allclose(c.point(res.breakpoints[0]), [1.0, 0.0], atol=1e-6)
    assert res.common_diameter == pytest.approx(1.0, rel=1e-6)


def test_single_piece_is_the_span():
    c = helpers.curve("koch-3")
    res = equal_diameter_division(c, ArcSpan(0.1, 0.4), 1)
    assert res.breakpoints == ()
    assert res.common_diameter == arc_diameter(c, ArcSpan(0.1, 0.4))


def test_bad_arguments():
    c = helpers.curve("koch-3")
    with pytest.raises(ValueError):
        equal_diameter_division(c, ArcSpan(0.1, 0.4), 0)
    with pytest.raises(DegenerateSpan):
        equal_diameter_division(c, ArcSpan(0.3, 0.3), 3)
    with pytest.raises(ValueError):
        smallest_count_below(c, ArcSpan(0.1, 0.4), 10.0)


def test_iteration_cap_raises():
    with pytest.raises(NoConvergence):
        equal_diameter_division(helpers.curve("koch-3"), WHOLE, 7, max_iter=1)


spans = st.tuples(
    st.floats(min_value=0.0, max_value=0.999),
    st.floats(min_value=0.01, max_value=1.0),
)


@settings(max_examples=40, deadline=None)
@given(span=spans, N=st.integers(min_value=2, max_value=24), name=st.sampled_from(["koch-3", "random_bt-42", "square"]))
def test_division_invariants(span, N, name):
    c = helpers.curve(name)
    u0, w = span
    arc = ArcSpan.from_unrolled(u0, u0 + w)
    try:
        res = equal_diameter_division(c, arc, N)
    except DegenerateSpan:
        return
    assert_valid(c, arc, res, N)


@settings(max_examples=40, deadline=None)
@given(frac=st.floats(min_value=0.02, max_value=1.0), name=st.sampled_from(["koch-3", "circle-256", "random_bt-42"]))
def test_smallest_count_bound(frac, name):
    c = helpers.curve(name)
    arc = ArcSpan(0.0, 0.6)
    delta = frac * arc_diameter(c, arc)
    n, res = smallest_count_below(c, arc, delta)
    assert delta / 2 - DEFAULT_TOL * delta <= res.common_diameter <= delta * (1 + DEFAULT_TOL)
    if n > 1:
        # minimality: one piece fewer does not reach delta
        fewer = equal_diameter_division(c, arc, n - 1)
        assert fewer.common_diameter > delta * (1 + DEFAULT_TOL)


def test_segment_count_example():
    n, res = smallest_count_below(fixture("segment"), ArcSpan(0.0, 1.0), 0.3)
    assert n == 4
    assert res.common_diameter == pytest.approx(0.25, abs=1e-9)
    assert res.common_diameter >= 0.15


def test_full_delta_gives_one_piece():
    c = helpers.curve("koch-3")
    arc = ArcSpan(0.2, 0.7)
    n, _ = smallest_count_below(c, arc, arc_diameter(c, arc))
    assert n == 1


def test_circle_delta_0_9_against_scan():
    c = helpers.curve("circle-256")
    commons = {n: equal_diameter_division(c, WHOLE, n).common_diameter for n in range(1, 33)}
    oracle = min(n for n, d in commons.items() if d <= 0.9 * (1 + DEFAULT_TOL))
    # on a round circle the n-division has diameter 2 sin(pi/n) for n >= 2
    assert oracle == 7
    assert commons[7] == pytest.approx(2 * math.sin(math.pi / 7), rel=1e-3)
    n, res = smallest_count_below(c, WHOLE, 0.9)
    assert n == oracle
    assert res.common_diameter == pytest.approx(commons[7], rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(min_value=0.01, max_value=1.0), b=st.floats(min_value=0.01, max_value=1.0))
def test_cover_count_monotone_in_trial_diameter(a, b):
    c = helpers.curve("koch-3")
    walker = _Walker(c, 0.0, 1.0, 0.0)
    lo, hi = sorted((a * c.diameter, b * c.diameter))
    assert walker.cover_count(hi) <= walker.cover_count(lo)


def test_abstract_backend_division():
    c = remetrize_dd(curve_from_points(fixture("circle-256").coords[::4]))
    res = equal_diameter_division(c, WHOLE, 4)
    assert res.count == 4
    np.testing.assert_allclose(res.breakpoints, [0.25, 0.5, 0.75], atol=1e-12)
    assert res.residual <= DEFAULT_TOL * res.common_diameter


def test_abstract_backend_resolution_limited():
    # 64 vertices cannot split into 5 pieces of equal dd-diameter; the best
    # vertex cuts are returned and flagged
    c = remetrize_dd(curve_from_points(fixture("circle-256").coords[::4]))
    res = equal_diameter_division(c, WHOLE, 5)
    assert res.resolution_limited
    assert res.count == 5
