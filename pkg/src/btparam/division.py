"""Division of an arc into subarcs of equal diameter.

For a trial diameter ``c`` the cut positions reachable by chaining pieces of
diameter ``c`` form intervals: cutting as early as possible gives the left
ends, cutting past every plateau of the growing diameter gives the right
ends.  ``c`` is bisected until the end of the span falls in the reachable
interval of the last cut, and the cuts are then recovered backwards.

An optional regularization ``eps * length`` can be added to the piece
diameter; it removes the plateaus but makes the cut positions extremely
sensitive to ``c`` on fractal curves, so it is off by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .curve import EXACT_TOL, ArcSpan, JordanCurve, arc_diameter
from .errors import DegenerateSpan, DivisionError, NoConvergence

EPS_REL = 0.0
DEFAULT_TOL = 1e-6
MAX_ITER = 200
SCAN_CAP = 10**6


@dataclass(frozen=True)
class DivisionResult:
    """Outcome of an N-piece division.

    ``breakpoints`` are the N-1 interior cut parameters in the curve's own
    parametrization; ``positions`` holds the same cuts unrolled, bracketed by
    both span ends.  ``diameters`` are the true (unregularized) piece
    diameters, ``common_diameter`` their maximum and ``residual`` their spread.
    """

    breakpoints: tuple[float, ...]
    common_diameter: float
    residual: float
    diameters: tuple[float, ...]
    positions: tuple[float, ...]
    iterations: int = 0
    resolution_limited: bool = False

    @property
    def count(self) -> int:
        return len(self.diameters)

    def pieces(self) -> list[ArcSpan]:
        p = self.positions
        return [ArcSpan.from_unrolled(p[i], p[i + 1]) for i in range(len(p) - 1)]


def equal_diameter_division(
    curve: JordanCurve,
    span: ArcSpan,
    N: int,
    tol: float = DEFAULT_TOL,
    *,
    eps_rel: float = EPS_REL,
    max_iter: int = MAX_ITER,
) -> DivisionResult:
    """Split ``span`` into ``N`` consecutive pieces of equal diameter."""
    if N < 1:
        raise ValueError(f"piece count must be >= 1, got {N}")
    u0, u1 = span.unrolled()
    if span.is_empty or u1 <= u0:
        raise DegenerateSpan("span is empty")
    diam = curve.span_diameter(u0, u1)
    if diam <= 0.0:
        raise DegenerateSpan("span has zero diameter")
    if N == 1:
        return _result(curve, (u0, u1), tol)
    eps = eps_rel * diam / curve.arc_length(u0, u1)
    if curve.embedded:
        return _divide_embedded(curve, u0, u1, N, tol, eps, max_iter)
    return _divide_abstract(curve, u0, u1, N, tol, eps, max_iter)


def smallest_count_below(
    curve: JordanCurve,
    span: ArcSpan,
    delta: float,
    tol: float = DEFAULT_TOL,
    **kwargs,
) -> tuple[int, DivisionResult]:
    """Smallest n whose equal-diameter n-division has diameter <= delta.

    Counts below ``diam / delta`` are skipped without dividing: n pieces
    chained along the span can't have a common diameter under diam / n.
    """
    diam = arc_diameter(curve, span)
    if not 0.0 < delta <= diam * (1.0 + EXACT_TOL):
        raise ValueError(f"delta must lie in (0, {diam}], got {delta}")
    n0 = max(1, math.ceil(diam / delta * (1.0 - EXACT_TOL)))
    if curve.embedded and kwargs.get("eps_rel", EPS_REL) == 0.0:
        u0, u1 = span.unrolled()
        n0 = max(n0, _Walker(curve, u0, u1, 0.0).cover_count(delta * (1.0 + tol)))
    for n in range(n0, SCAN_CAP + 1):
        res = equal_diameter_division(curve, span, n, tol, **kwargs)
        if res.common_diameter <= delta * (1.0 + tol):
            return n, res
    raise NoConvergence(f"no division below {delta} with at most {SCAN_CAP} pieces")


# -- embedded backend -------------------------------------------------------------


class _Walker:
    """Greedy cutter over one span of an embedded curve."""

    def __init__(self, curve: JordanCurve, u0: float, u1: float, eps: float):
        p = curve._ext_param
        a = int(np.searchsorted(p, u0, side="right"))
        b = int(np.searchsorted(p, u1, side="left")) - 1
        b = max(b, a - 1)
        self.curve = curve
        self.a = a
        self.V = curve._ext_coords[a : b + 1]
        self.param = p[a : b + 1]
        self.start = u0
        self.u1 = u1
        self.P1 = curve._xy(u1)
        self.eps = eps
        self.scale = curve.length
        d_end = _norms(self.V - self.P1)
        self.suffix_end = np.maximum.accumulate(d_end[::-1])[::-1] if len(d_end) else d_end

    @property
    def straight(self) -> bool:
        return len(self.V) == 0

    def size(self, s: float, t: float) -> float:
        """Regularized diameter of the piece [s, t]."""
        if t <= s:
            return 0.0
        return self.curve.span_diameter(s, t) + self.eps * (t - s) * self.scale

    def cover_count(self, delta: float) -> int:
        """Fewest consecutive pieces of diameter <= delta covering the span.

        Cutting each piece as late as possible is optimal, and no equal
        division into fewer pieces can stay below ``delta``.
        """
        u, k = self.start, 0
        while u is not None and u < self.u1:
            u = self.advance(u, delta, strict=True)
            k += 1
        return k

    def advance(self, u: float, c: float, strict: bool = False):
        """First position after ``u`` where the piece size reaches ``c``.

        With ``strict`` the piece size must exceed ``c``, which skips any
        plateau at level ``c``.  ``None`` when the span end comes first.
        """
        curve, eps, L = self.curve, self.eps, self.scale
        k0 = int(np.searchsorted(self.param, u, side="right"))
        P = curve._xy(u)
        Q = self.V[k0:]
        m = len(Q)
        if m:
            dP = _norms(Q - P)
            R = curve.run_diameters[(self.a + k0) % curve.n, :m]
            D = np.maximum(R, np.maximum.accumulate(dP))
            F = D + eps * (self.param[k0:] - u) * L
            D_end = max(D[-1], self.suffix_end[k0])
        else:
            D_end = 0.0
        F_end = max(D_end, float(np.linalg.norm(self.P1 - P))) + eps * (self.u1 - u) * L
        if F_end < c or (strict and F_end <= c):
            return None
        side = "right" if strict else "left"
        i = int(np.searchsorted(F, c, side=side)) if m else 0
        if i == 0:
            S, s_u, D_prev = P, u, 0.0
            qs = P[None, :]
        else:
            S, s_u, D_prev = Q[i - 1], self.param[k0 + i - 1], D[i - 1]
            qs = np.vstack([P[None, :], Q[:i]])
        if i < m:
            E, e_u = Q[i], self.param[k0 + i]
        else:
            E, e_u = self.P1, self.u1
        f = _first_crossing(S, E, qs, D_prev, (s_u - u) * L, (e_u - s_u) * L, eps, c)
        return s_u + f * (e_u - s_u)


def _first_crossing(S, E, qs, D_prev, L_before, ell, eps, c):
    """Smallest f in [0, 1] with the piece size reaching ``c`` on edge S -> E.

    Along the edge the point is S + f (E - S); the piece size is
    max(D_prev, max_q |S + f e - q|) + eps (L_before + f ell).  Each term
    |w + f e| + eps (L_before + f ell) is convex in f and starts below c, so
    its crossing is the positive root of a quadratic.
    """
    e = E - S
    R0 = c - eps * L_before
    f_best = (c - D_prev - eps * L_before) / (eps * ell) if eps * ell > 0 else math.inf
    W = S[None, :] - qs
    A = float(e @ e) - (eps * ell) ** 2
    if A > 0.0:
        B = W @ e + R0 * eps * ell
        C0 = np.minimum(np.einsum("ij,ij->i", W, W) - R0 * R0, 0.0)
        sq = np.sqrt(np.maximum(B * B - A * C0, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            roots = np.where(B < 0, (sq - B) / A, -C0 / (B + sq))
        roots = np.where(np.isfinite(roots), roots, 0.0)
        f_best = min(f_best, float(roots.min()))
    return min(max(f_best, 0.0), 1.0)


def _divide_embedded(curve, u0, u1, N, tol, eps, max_iter):
    """Reachable-interval shooting on the trial diameter.

    For a trial ``c`` every cut position reachable with pieces of size in
    [c_lo, c_hi] = c (1 -+ band) forms an interval: its left end comes from
    cutting as early as possible, its right end from cutting as late as
    possible (past any plateau).  The signed distance from the span end to
    the reachable interval of the N-th cut is nondecreasing in ``c`` and
    vanishes on a whole interval of width about 2 band c, so the bracketing
    root finder stops as soon as it lands there.  The cuts are then
    recovered backwards, each inside its reachable interval.
    """
    walker = _Walker(curve, u0, u1, eps)
    if walker.straight:
        positions = tuple(np.linspace(u0, u1, N + 1))
        return _result(curve, (u0, *positions[1:-1], u1), tol)

    band = 0.1 * tol
    seen: list[tuple[float, int]] = []
    found = []

    def gap(c):
        """Signed miss of the span end: > 0 means ``c`` is too large."""
        c_lo, c_hi = c * (1 - band), c * (1 + band)
        lo = [u0]
        for k in range(N):
            nxt = walker.advance(lo[-1], c_lo)
            if nxt is None:
                seen.append((c, k))
                return (N - k) * (u1 - u0) + (u1 - lo[-1])
            lo.append(nxt)
        seen.append((c, N))
        if lo[N] > u1:
            return lo[N] - u1
        hi = [u0]
        for _ in range(N):
            h = walker.advance(hi[-1], c_hi, strict=True) if hi[-1] < u1 else None
            hi.append(u1 if h is None else h)
        if hi[N] < u1:
            return hi[N] - u1
        found.append((c, lo, hi))
        return 0.0

    c_top = walker.size(u0, u1)
    c_min = c_top / N
    if gap(c_min) >= 0.0 and not found:
        raise NoConvergence("trial diameter search lost its bracket")
    iters = 1
    if not found:
        try:
            _, info = brentq(gap, c_min, c_top, xtol=1e-15 * c_top, maxiter=max_iter,
                             full_output=True, disp=False)
            iters += info.function_calls
        except ValueError as exc:
            raise NoConvergence(str(exc)) from exc
    _check_monotone(seen)
    if not found:
        raise NoConvergence(f"trial diameter search did not converge in {iters} evaluations")
    c, lo, hi = found[-1]
    c_lo, c_hi = c * (1 - band), c * (1 + band)
    cuts = [u1]
    for k in range(N - 1, 0, -1):
        cuts.append(_back_cut(walker, lo[k], max(lo[k], min(hi[k], cuts[-1])), cuts[-1], c, c_lo, c_hi))
    positions = (u0, *reversed(cuts[1:]), u1)
    if not all(p < q for p, q in zip(positions, positions[1:])):
        raise NoConvergence("recovered cuts are not strictly increasing")
    res = _result(curve, positions, tol, iters)
    if res.residual > tol * res.common_diameter:
        raise NoConvergence(
            f"piece diameters differ by {res.residual:.3g} (> {tol} relative)"
        )
    return res


def _back_cut(walker, s_lo, s_hi, t, c, c_lo, c_hi):
    """A start s in [s_lo, s_hi] whose piece [s, t] has size within [c_lo, c_hi]."""
    if walker.size(s_lo, t) <= c_hi:
        return s_lo
    if walker.size(s_hi, t) >= c_lo:
        return s_hi
    for _ in range(200):
        s = 0.5 * (s_lo + s_hi)
        size = walker.size(s, t)
        if c_lo <= size <= c_hi:
            return s
        if size > c:
            s_lo = s
        else:
            s_hi = s
    return s


# -- abstract backend -------------------------------------------------------------


def _divide_abstract(curve, u0, u1, N, tol, eps, max_iter):
    """Division restricted to vertex cuts; exactness is limited by resolution."""
    v0 = curve._snap(u0)
    v1 = v0 + curve.n if curve.closed and u1 - u0 >= 1.0 else curve._snap(u1)
    if v1 - v0 < N:
        raise DegenerateSpan(f"span has {v1 - v0} edges, cannot cut {N} pieces")
    cum = curve._ext_cum
    T = curve.run_diameters

    def F(vs, ks):
        return T[vs % curve.n, np.minimum(ks - vs, curve.n - 1)] + eps * (cum[ks] - cum[vs])

    def march(c):
        pos, cuts = v0, []
        for _ in range(N - 1):
            ks = np.arange(pos + 1, v1)
            if not len(ks):
                break
            i = int(np.searchsorted(F(pos, ks), c, side="left"))
            if i == len(ks):
                break
            pos = int(ks[i])
            cuts.append(pos)
        return cuts

    lo = 0.0
    hi = float(F(v0, np.array([v1]))[0])
    best = None
    for it in range(1, max_iter + 1):
        c = 0.5 * (lo + hi)
        cuts = march(c)
        if len(cuts) < N - 1:
            hi = c
            continue
        last = float(F(cuts[-1], np.array([v1]))[0])
        if last >= c:
            lo = c
        else:
            hi = c
        verts = (v0, *cuts, v1)
        res = _result(curve, tuple(float(curve._ext_param[v]) for v in verts), tol, it)
        if best is None or res.residual < best.residual:
            best = res
        if best.residual <= tol * best.common_diameter or hi - lo <= 1e-15 * hi:
            break
    if best is None:
        raise NoConvergence(f"no vertex division into {N} pieces found")
    limited = best.residual > tol * best.common_diameter
    return DivisionResult(**{**best.__dict__, "resolution_limited": limited})


# -- shared -----------------------------------------------------------------------


def _result(curve, positions, tol, iterations=0) -> DivisionResult:
    diams = tuple(
        curve.span_diameter(positions[i], positions[i + 1]) for i in range(len(positions) - 1)
    )
    common = max(diams)
    if curve.closed:
        bps = tuple(p - 1.0 if p >= 1.0 else p for p in positions[1:-1])
    else:
        bps = tuple(positions[1:-1])
    return DivisionResult(
        breakpoints=tuple(float(b) for b in bps),
        common_diameter=common,
        residual=common - min(diams),
        diameters=diams,
        positions=tuple(float(p) for p in positions),
        iterations=iterations,
    )


def _check_monotone(seen):
    """Larger trial diameters never need more cuts."""
    ordered = sorted(seen)
    for (c_a, k_a), (c_b, k_b) in zip(ordered, ordered[1:]):
        if c_b > c_a and k_b > k_a:
            raise DivisionError(
                f"greedy cut count increased from {k_a} to {k_b} between c={c_a} and c={c_b}"
            )


def _norms(diff: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))
