import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

from btparam.curve import (
    ArcSpan,
    arc_diameter,
    bounded_turning_constant,
    curve_from_distance_matrix,
    curve_from_points,
    diameter_distance,
    find_self_intersection,
    remetrize_dd,
    smaller_arc,
)
from btparam.errors import DegenerateEdge, NotSimple, NotSymmetric, SamePoint, TooFewPoints, TriangleViolation
from btparam.generators import fixture

import helpers

params = st.floats(min_value=0.0, max_value=1.0, exclude_max=True, allow_nan=False)


def brute_span_diameter(curve, u0, u1):
    """Diameter of the unrolled arc [u0, u1] from its interior vertices and endpoints."""
    ext = np.concatenate([curve.param, curve.param + 1.0]) if curve.closed else curve.param
    verts = np.concatenate([curve.coords, curve.coords]) if curve.closed else curve.coords
    inside = verts[(ext > u0) & (ext < u1)]
    pts = np.vstack([curve.point(u0), curve.point(u1), inside])
    return float(cdist(pts, pts).max())


# -- construction ------------------------------------------------------------------


def test_square_corners_param():
    c = curve_from_points([(0, 0), (1, 0), (1, 1), (0, 1)], closed=True)
    assert c.n == 4 and c.closed
    np.testing.assert_allclose(c.param, [0, 0.25, 0.5, 0.75])
    assert c.basepoint == 0


def test_two_points_closed_is_too_few():
    with pytest.raises(TooFewPoints):
        curve_from_points([(0, 0), (1, 0)], closed=True)


def test_repeated_vertex_is_degenerate():
    with pytest.raises(DegenerateEdge):
        curve_from_points([(0, 0), (0, 0), (1, 0)], closed=False)


def test_path_metric_matrix():
    D = np.abs(np.subtract.outer(np.arange(4.0), np.arange(4.0)))
    c = curve_from_distance_matrix(D, closed=False)
    assert c.backend == "abstract"
    np.testing.assert_allclose(c.param, [0, 1 / 3, 2 / 3, 1])
    assert c.n == 4


def test_asymmetric_matrix_rejected():
    D = np.abs(np.subtract.outer(np.arange(4.0), np.arange(4.0)))
    D[1, 2] = 1.5
    with pytest.raises(NotSymmetric):
        curve_from_distance_matrix(D, closed=False)


def test_triangle_violation_names_the_triple():
    D = np.abs(np.subtract.outer(np.arange(4.0), np.arange(4.0)))
    D[0, 2] = D[2, 0] = 2.5
    with pytest.raises(TriangleViolation) as info:
        curve_from_distance_matrix(D, closed=False)
    assert set(info.value.triple) == {0, 1, 2}
    assert info.value.to_dict()["error"] == "triangle_violation"


def test_self_intersection_detected_when_asked():
    bowtie = [(0, 0), (1, 1), (1, 0), (0, 1)]
    assert find_self_intersection(np.array(bowtie, dtype=float)) is not None
    with pytest.raises(NotSimple):
        curve_from_points(bowtie, closed=True, check_simple=True)
    curve_from_points(bowtie, closed=True)  # trusted by default


# -- diameters and dd -------------------------------------------------------------


def test_half_and_quarter_circle_diameters():
    c = helpers.curve("circle-256")
    assert arc_diameter(c, ArcSpan(0.0, 0.5)) == pytest.approx(2.0, abs=1e-3)
    assert arc_diameter(c, ArcSpan(0.0, 0.25)) == pytest.approx(math.sqrt(2), abs=1e-3)
    assert arc_diameter(c, ArcSpan(0.3, 0.3)) == 0.0


def test_segment_subarc_diameter_is_length():
    c = fixture("segment")
    assert arc_diameter(c, ArcSpan(0.2, 0.7)) == pytest.approx(0.5, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(u0=params, w=st.floats(min_value=1e-6, max_value=1.0))
def test_span_diameter_matches_brute_force(u0, w):
    for name in ("koch-3", "random_bt-42"):
        c = helpers.curve(name)
        assert c.span_diameter(u0, u0 + w) == pytest.approx(brute_span_diameter(c, u0, u0 + w), rel=1e-12)


def test_smaller_arc_quarter_and_tie():
    c = helpers.curve("circle-256")
    assert smaller_arc(c, 0.0, 0.25) == ArcSpan(0.0, 0.25)
    assert smaller_arc(c, 0.25, 0.0) == ArcSpan(0.0, 0.25)
    # antipodal: both arcs have diameter 2, the positively oriented one wins
    assert smaller_arc(c, 0.0, 0.5) == ArcSpan(0.0, 0.5)
    assert smaller_arc(c, 0.5, 0.0) == ArcSpan(0.5, 0.0, wraps=True)
    with pytest.raises(SamePoint):
        smaller_arc(c, 0.1, 0.1)


def test_smaller_arc_square_goes_through_shared_corner():
    c = helpers.curve("square")
    x, y = 0.125, 0.375  # midpoints of the bottom and right sides
    arc = smaller_arc(c, x, y)
    assert arc == ArcSpan(x, y)
    # brute force: the corner arc has diameter |x - y|; the other one holds opposite corners
    assert brute_span_diameter(c, x, y) == pytest.approx(math.sqrt(0.5))
    assert brute_span_diameter(c, y, x + 1) == pytest.approx(math.sqrt(2))


def test_dd_examples():
    circle = helpers.curve("circle-256")
    assert diameter_distance(circle, 0.0, 0.25) == pytest.approx(math.sqrt(2), abs=1e-3)
    assert diameter_distance(circle, 0.1, 0.6) == pytest.approx(2.0, abs=1e-3)
    assert diameter_distance(circle, 0.3, 0.3) == 0.0
    seg = fixture("segment")
    assert diameter_distance(seg, 0.2, 0.9) == seg.distance(0.2, 0.9)


@settings(max_examples=80, deadline=None)
@given(x=params, y=params, z=params)
def test_dd_is_a_metric(x, y, z):
    for name in ("koch-3", "square", "random_bt-42"):
        c = helpers.curve(name)
        xy, yz, xz = c.dd(x, y), c.dd(y, z), c.dd(x, z)
        assert xy == c.dd(y, x)
        assert xz <= (xy + yz) * (1 + 1e-9) + 1e-15
        assert xy >= c.distance(x, y) * (1 - 1e-12)


def test_dd_to_vertices_matches_pointwise():
    c = helpers.curve("koch-3")
    rng = np.random.default_rng(3)
    for u in rng.random(10):
        row = c.dd_to_vertices(u)
        expected = [c.dd(u, v) for v in c.param]
        np.testing.assert_allclose(row, expected, rtol=1e-12, atol=1e-15)


# -- bounded turning constant -----------------------------------------------------


def test_segment_is_one_bt():
    assert bounded_turning_constant(fixture("segment")) == 1.0


def test_circle_is_nearly_one_bt():
    # brute force over every vertex pair of the 256-gon
    c = helpers.curve("circle-256")
    X = c.coords
    best = 1.0
    for i in range(c.n):
        for j in range(i + 1, c.n):
            k = j - i
            run = min(k, c.n - k)
            # the shorter run of a regular polygon is the smaller-diameter arc
            d_arc = 2 * math.sin(math.pi * min(run, c.n // 2) / c.n) if run < c.n // 2 else 2.0
            best = max(best, d_arc / np.linalg.norm(X[i] - X[j]))
    assert best == pytest.approx(1.0, rel=0.02)
    assert bounded_turning_constant(c) == pytest.approx(best, rel=0.02)


def square_position(t):
    t = t % 4.0
    side, f = int(t), t - int(t)
    corners = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)]
    a, b = np.array(corners[side], float), np.array(corners[side + 1], float)
    return a + f * (b - a)


def square_ratio(t0, t1):
    """dd / distance on the unit square from first principles: arcs through corners."""
    def arc_diam(a, b):
        pts = [square_position(a), square_position(b)]
        pts += [square_position(k) for k in range(math.floor(a) + 1, math.ceil(b))]
        P = np.array(pts)
        return cdist(P, P).max()

    a, b = sorted((t0 % 4.0, t1 % 4.0))
    d = np.linalg.norm(square_position(a) - square_position(b))
    if d < 1e-9:
        return 1.0
    return min(arc_diam(a, b), arc_diam(b, a + 4.0)) / d


def test_square_bt_constant_against_oracle():
    # coarse scan of boundary pairs, then local refinement of the best pair
    grid = np.arange(0, 4, 0.05)
    best = max(((square_ratio(a, b), a, b) for a in grid for b in grid if a < b), key=lambda r: r[0])
    refined = minimize(lambda v: -square_ratio(*v), x0=best[1:], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13})
    oracle = -refined.fun
    # the optimum sits at the golden-ratio point; the constant is (1 + sqrt 5) / (2 sqrt 2)
    assert oracle == pytest.approx((1 + math.sqrt(5)) / (2 * math.sqrt(2)), abs=1e-9)
    assert bounded_turning_constant(helpers.curve("square")) == pytest.approx(oracle, rel=0.01)


# -- remetrization ----------------------------------------------------------------


def test_remetrized_segment_unchanged():
    c = fixture("segment")
    np.testing.assert_allclose(remetrize_dd(c).matrix, c.dist, rtol=0, atol=1e-15)


@pytest.mark.parametrize("name", ["square", "koch-3", "random_bt-42"])
def test_remetrization_properties(name):
    c = helpers.curve(name)
    r = remetrize_dd(c)
    C = bounded_turning_constant(c)
    assert 1.0 <= bounded_turning_constant(r) <= 1.0 + 1e-6
    off = ~np.eye(c.n, dtype=bool)
    assert np.all(r.matrix >= c.dist - 1e-15)
    assert np.all(r.matrix[off] <= C * c.dist[off] * (1 + 1e-9))
    # idempotent
    np.testing.assert_allclose(remetrize_dd(r).matrix, r.matrix, rtol=1e-12, atol=1e-15)
