"""Discrete metric Jordan curves and arcs.

A curve is an ordered list of vertices together with a metric. The metric is
either Euclidean on embedded coordinates (the polyline is then a genuine
Jordan curve and points between vertices are interpolated) or an abstract
distance matrix (points between vertices snap to the nearest vertex).

Positions along a curve are chord-length parameters in [0, 1]. Internally a
closed curve is unrolled onto [0, 2] so that arcs through the basepoint are
plain intervals ``u0 <= u <= u1`` with ``u1 - u0 <= 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    CurveError,
    DegenerateEdge,
    NotSimple,
    NotSymmetric,
    SamePoint,
    TooFewPoints,
    TriangleViolation,
)

#: relative tolerance for identities that hold exactly in exact arithmetic
EXACT_TOL = 1e-9
#: pairs closer than this are ignored when estimating ratios
MIN_SEPARATION = 1e-12
#: relative tolerance used to detect ties between the two arcs joining x, y
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ArcSpan:
    """Oriented subarc running from ``start`` to ``end``.

    On a closed curve ``wraps`` marks an arc that passes the basepoint, i.e.
    ``[start, 1) + [0, end]``; ``ArcSpan(x, x, wraps=True)`` is the whole loop
    started at ``x``.  On open curves ``wraps`` is always false.
    """

    start: float
    end: float
    wraps: bool = False

    @classmethod
    def from_unrolled(cls, u0: float, u1: float) -> "ArcSpan":
        if u1 > 1.0:
            return cls(float(u0), float(u1 - 1.0), True)
        return cls(float(u0), float(u1), False)

    def unrolled(self) -> tuple[float, float]:
        return self.start, (self.end + 1.0 if self.wraps else self.end)

    @property
    def is_empty(self) -> bool:
        return not self.wraps and self.start == self.end


class JordanCurve:
    """Immutable discrete Jordan curve (``closed=True``) or arc.

    Use :func:`curve_from_points` or :func:`curve_from_distance_matrix`
    rather than calling the constructor, which does not validate.
    """

    def __init__(self, closed: bool, coords=None, matrix=None):
        if (coords is None) == (matrix is None):
            raise CurveError("exactly one of coords / matrix is required")
        self.closed = bool(closed)
        if coords is not None:
            self.coords = _frozen(np.array(coords, dtype=float))
            self.matrix = None
            self.backend = "embedded"
        else:
            self.coords = None
            self.matrix = _frozen(np.array(matrix, dtype=float))
            self.backend = "abstract"
        self.n = len(self.coords if coords is not None else self.matrix)
        self.basepoint = 0

        n = self.n
        nxt = np.arange(1, n + 1) % n if self.closed else np.arange(1, n)
        cur = np.arange(len(nxt))
        if self.coords is not None:
            edges = np.linalg.norm(self.coords[nxt] - self.coords[cur], axis=1)
        else:
            edges = self.matrix[cur, nxt]
        self.edge_lengths = _frozen(edges)
        cum = np.concatenate([[0.0], np.cumsum(edges)])
        self.length = float(cum[-1])
        self.param = _frozen(cum[:n] / self.length)

        # unrolled vertex table: closed curves are traversed twice
        ext_edges = np.tile(edges, 2) if self.closed else edges
        ext_cum = np.concatenate([[0.0], np.cumsum(ext_edges)])
        self._ext_cum = _frozen(ext_cum)
        self._ext_param = _frozen(ext_cum / self.length)
        self._ext_vertex = _frozen(np.arange(len(ext_cum)) % n)
        if self.coords is not None:
            self._ext_coords = _frozen(self.coords[self._ext_vertex])

    def __repr__(self):
        kind = "closed" if self.closed else "open"
        return f"JordanCurve({kind}, n={self.n}, backend={self.backend})"

    @property
    def points(self) -> range:
        return range(self.n)

    @property
    def embedded(self) -> bool:
        return self.coords is not None

    @property
    def u_max(self) -> float:
        return 2.0 if self.closed else 1.0

    # -- metric tables -----------------------------------------------------

    @cached_property
    def dist(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return _frozen(cdist(self.coords, self.coords))

    @cached_property
    def run_diameters(self) -> np.ndarray:
        """``T[i, k]`` = diameter of the vertex run ``i, i+1, ..., i+k``.

        Indices wrap modulo ``n`` on closed curves; on open curves entries
        with ``i + k >= n`` are NaN.
        """
        n, D = self.n, self.dist
        T = np.full((n, n), np.nan)
        T[:, 0] = 0.0
        idx = np.arange(n)
        for k in range(1, n):
            if self.closed:
                T[:, k] = np.maximum(
                    np.maximum(T[:, k - 1], T[(idx + 1) % n, k - 1]),
                    D[idx, (idx + k) % n],
                )
            else:
                m = n - k
                T[:m, k] = np.maximum(
                    np.maximum(T[:m, k - 1], T[1 : m + 1, k - 1]),
                    D[idx[:m], idx[:m] + k],
                )
        return _frozen(T)

    @cached_property
    def dd_matrix(self) -> np.ndarray:
        """Diameter distance between every pair of vertices."""
        n, T = self.n, self.run_diameters
        i = np.arange(n)[:, None]
        j = np.arange(n)[None, :]
        if self.closed:
            k = (j - i) % n
            return _frozen(np.minimum(T[i, k], T[j, (-k) % n]))
        lo = np.minimum(i, j)
        return _frozen(T[lo, np.abs(j - i)])

    @cached_property
    def diameter(self) -> float:
        return float(self.run_diameters[0, self.n - 1])

    def _run(self, a: int, b: int) -> float:
        """Diameter of the unrolled vertex run ``a..b``."""
        if b <= a:
            return 0.0
        return float(self.run_diameters[a % self.n, min(b - a, self.n - 1)])

    # -- positions -----------------------------------------------------------

    def _locate(self, u: float) -> tuple[int, float]:
        p = self._ext_param
        e = int(np.searchsorted(p, u, side="right")) - 1
        e = min(max(e, 0), len(p) - 2)
        f = (u - p[e]) / (p[e + 1] - p[e])
        return e, min(max(f, 0.0), 1.0)

    def _snap(self, u: float) -> int:
        e, f = self._locate(u)
        return e + 1 if f > 0.5 else e

    def _xy(self, u: float) -> np.ndarray:
        e, f = self._locate(u)
        X = self._ext_coords
        if f == 0.0:
            return X[e]
        if f == 1.0:
            return X[e + 1]
        return X[e] + f * (X[e + 1] - X[e])

    def point(self, u: float):
        """Coordinates at parameter ``u`` (``None`` on the abstract backend)."""
        if self.coords is None:
            return None
        return self._xy(_wrap(u) if self.closed else u)

    def vertex_near(self, u: float) -> int:
        return int(self._ext_vertex[self._snap(_wrap(u) if self.closed else u)])

    def distance(self, u: float, v: float) -> float:
        """Distance in the curve's own metric between the points at u and v."""
        if self.coords is None:
            return float(self.dist[self.vertex_near(u), self.vertex_near(v)])
        return float(np.linalg.norm(self.point(u) - self.point(v)))

    def arc_length(self, u0: float, u1: float) -> float:
        """Chord length of the unrolled arc ``[u0, u1]``."""
        return (u1 - u0) * self.length

    # -- diameters -----------------------------------------------------------

    def span_diameter(self, u0: float, u1: float) -> float:
        """Diameter of the unrolled arc ``[u0, u1]`` (``u0 <= u1 <= u0 + 1``).

        On embedded curves this is exact: a convex function of a point pair
        attains its maximum over two segments at segment endpoints.
        """
        if u1 <= u0:
            return 0.0
        if self.coords is None:
            if u1 - u0 >= 1.0:
                return self.diameter
            a, b = self._snap(u0), self._snap(u1)
            return self._run(a, min(b, a + self.n - 1))
        p = self._ext_param
        a = int(np.searchsorted(p, u0, side="right"))
        b = int(np.searchsorted(p, u1, side="left")) - 1
        P0, P1 = self._xy(u0), self._xy(u1)
        d = float(np.linalg.norm(P0 - P1))
        if b >= a:
            b = min(b, a + self.n - 1)
            V = self._ext_coords[a : b + 1]
            d = max(d, self._run(a, b), _max_norm(V - P0), _max_norm(V - P1))
        return d

    def dd(self, x: float, y: float) -> float:
        """Diameter distance: diameter of the smaller arc joining x and y."""
        if not self.closed:
            return self.span_diameter(min(x, y), max(x, y))
        x, y = _wrap(x), _wrap(y)
        if x == y:
            return 0.0
        fwd = self.span_diameter(x, y if y > x else y + 1.0)
        bwd = self.span_diameter(y, x if x > y else x + 1.0)
        return min(fwd, bwd)

    def dd_to_vertices(self, u: float) -> np.ndarray:
        """Diameter distance from the point at ``u`` to every vertex."""
        if self.coords is None:
            return self.dd_matrix[self.vertex_near(u)]
        n, T = self.n, self.run_diameters
        if self.closed:
            u = _wrap(u)
        e, _ = self._locate(u)
        P = self._xy(u)
        if self.closed:
            # vertices e+1 .. e+n in unrolled order; the last one is vertex e
            idx = np.arange(e + 1, e + n + 1)
            dP = np.linalg.norm(self._ext_coords[idx] - P, axis=1)
            k = np.arange(n)
            fwd = np.maximum(T[(e + 1) % n, k], np.maximum.accumulate(dP))
            bwd = np.maximum(
                T[idx % n, n - 1 - k], np.maximum.accumulate(dP[::-1])[::-1]
            )
            out = np.empty(n)
            out[idx % n] = np.minimum(fwd, bwd)
            return out
        dP = np.linalg.norm(self.coords - P, axis=1)
        out = np.empty(n)
        right = np.arange(e + 1, n)
        if len(right):
            out[right] = np.maximum(
                T[e + 1, right - e - 1], np.maximum.accumulate(dP[e + 1 :])
            )
        left = np.arange(0, e + 1)
        out[left] = np.maximum(
            T[left, e - left], np.maximum.accumulate(dP[: e + 1][::-1])[::-1]
        )
        return out


# -- construction ---------------------------------------------------------------


def curve_from_points(coords, closed: bool = True, check_simple: bool = False):
    """Build an embedded curve from vertex coordinates (chord-length param)."""
    X = np.asarray(coords, dtype=float)
    if X.ndim != 2 or X.shape[1] < 1:
        raise CurveError("points must be a list of d-dimensional coordinates")
    if not np.all(np.isfinite(X)):
        raise CurveError("points must be finite")
    n = len(X)
    need = 3 if closed else 2
    if n < need:
        raise TooFewPoints(f"{'closed' if closed else 'open'} curve needs >= {need} points, got {n}")
    nxt = np.arange(1, n + 1) % n if closed else np.arange(1, n)
    lengths = np.linalg.norm(X[nxt] - X[: len(nxt)], axis=1)
    bad = np.flatnonzero(lengths == 0.0)
    if len(bad):
        i = int(bad[0])
        raise DegenerateEdge(f"zero-length edge between vertices {i} and {int(nxt[i])}")
    if check_simple:
        crossing = find_self_intersection(X, closed)
        if crossing is not None:
            raise NotSimple(f"edges {crossing[0]} and {crossing[1]} intersect")
    return JordanCurve(closed, coords=X)


def curve_from_distance_matrix(D, closed: bool = True, tol: float = EXACT_TOL):
    """Build an abstract-backend curve; vertex order is the curve order."""
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise CurveError("distance matrix must be square")
    n = len(D)
    need = 3 if closed else 2
    if n < need:
        raise TooFewPoints(f"{'closed' if closed else 'open'} curve needs >= {need} points, got {n}")
    if not np.all(np.isfinite(D)) or np.any(D < 0):
        raise CurveError("distances must be finite and non-negative")
    scale = max(1.0, float(D.max()))
    asym = np.abs(D - D.T)
    if asym.max() > tol * scale:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise NotSymmetric(f"D[{i}][{j}] != D[{j}][{i}]")
    if np.any(np.diag(D) != 0.0):
        raise CurveError("distance matrix must have a zero diagonal")
    for k in range(n):
        excess = D - (D[:, k : k + 1] + D[k : k + 1, :])
        worst = int(np.argmax(excess))
        if excess.flat[worst] > tol * scale:
            i, j = np.unravel_index(worst, excess.shape)
            raise TriangleViolation((i, j, k), excess.flat[worst])
    nxt = np.arange(1, n + 1) % n if closed else np.arange(1, n)
    bad = np.flatnonzero(D[np.arange(len(nxt)), nxt] == 0.0)
    if len(bad):
        i = int(bad[0])
        raise DegenerateEdge(f"vertices {i} and {int(nxt[i])} are at distance 0")
    return JordanCurve(closed, matrix=D)


def find_self_intersection(X, closed: bool = True):
    """Return a pair of non-adjacent intersecting edges of a planar polyline.

    O(n^2); returns ``None`` when the polyline is simple.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[1] != 2:
        raise CurveError("self-intersection check is implemented for planar curves")
    n = len(X)
    m = n if closed else n - 1
    A = X[np.arange(m)]
    B = X[(np.arange(m) + 1) % n]

    # cross products within roundoff of zero count as collinear
    eps = 64 * np.finfo(float).eps * float(np.ptp(X, axis=0).max()) ** 2

    def orient(p, q, r):
        cross = ((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1])
                 - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))
        return np.where(np.abs(cross) <= eps, 0.0, np.sign(cross))

    for i in range(m):
        j = np.arange(i + 2, m)
        if closed and i == 0:
            j = j[j != m - 1]
        if not len(j):
            continue
        a, b = A[i], B[i]
        c, d = A[j], B[j]
        o1, o2 = orient(a, b, c), orient(a, b, d)
        o3, o4 = orient(c, d, a), orient(c, d, b)
        proper = (o1 * o2 <= 0) & (o3 * o4 <= 0)
        # collinear but disjoint segments satisfy the sign test trivially
        colinear = (o1 == 0) & (o2 == 0)
        if np.any(colinear):
            lo = np.minimum(c, d)
            hi = np.maximum(c, d)
            overlap = np.all((np.maximum(lo, np.minimum(a, b)) <= np.minimum(hi, np.maximum(a, b))), axis=1)
            proper = np.where(colinear, overlap, proper)
        hit = np.flatnonzero(proper)
        if len(hit):
            return i, int(j[hit[0]])
    return None


# -- operations -----------------------------------------------------------------


def arc_diameter(curve: JordanCurve, span: ArcSpan) -> float:
    if span.is_empty:
        return 0.0
    return curve.span_diameter(*span.unrolled())


def smaller_arc(curve: JordanCurve, x: float, y: float) -> ArcSpan:
    """The arc of smaller diameter between x and y.

    Ties go to the positively oriented arc from x to y.  On an open curve the
    unique arc between the two points is returned.
    """
    if not curve.closed:
        if x == y:
            raise SamePoint("x and y coincide")
        return ArcSpan(min(x, y), max(x, y))
    x, y = _wrap(x), _wrap(y)
    if x == y:
        raise SamePoint("x and y coincide")
    fwd = ArcSpan(x, y, wraps=y < x)
    bwd = ArcSpan(y, x, wraps=x < y)
    d_fwd, d_bwd = arc_diameter(curve, fwd), arc_diameter(curve, bwd)
    if d_bwd < d_fwd - TIE_TOL * max(d_fwd, d_bwd):
        return bwd
    return fwd


def diameter_distance(curve: JordanCurve, x: float, y: float) -> float:
    return curve.dd(x, y)


def bounded_turning_constant(curve: JordanCurve, resolution: int | None = None, seed: int = 0) -> float:
    """Sampled sup of dd(x, y) / |x - y|.

    Every vertex pair is used, plus ``resolution`` uniformly random pairs of
    curve parameters (default four per vertex).
    """
    D, DD = curve.dist, curve.dd_matrix
    mask = D >= MIN_SEPARATION
    best = float((DD[mask] / D[mask]).max()) if mask.any() else 1.0
    if resolution is None:
        resolution = 4 * curve.n
    rng = np.random.default_rng(seed)
    uv = rng.random((int(resolution), 2))
    for u, v in uv:
        d = curve.distance(u, v)
        if d < MIN_SEPARATION:
            continue
        best = max(best, curve.dd(u, v) / d)
    return max(1.0, best)


def remetrize_dd(curve: JordanCurve) -> JordanCurve:
    """The same vertices carrying the diameter distance (a 1-BT curve)."""
    return JordanCurve(curve.closed, matrix=curve.dd_matrix)


# -- helpers ---------------------------------------------------------------------


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _wrap(u: float) -> float:
    u = float(u) % 1.0
    return 0.0 if u == 1.0 else u


def _max_norm(diff: np.ndarray) -> float:
    return float(np.sqrt(np.einsum("ij,ij->i", diff, diff)).max())
