"""The parametrization of a curve by the circle, built from paired subdivisions.

The j-th breakpoint of circle level n is sent to the j-th arc endpoint of
curve level n.  Between breakpoints a circle point is sent to the image of
the nearest deepest-level breakpoint, which is within one deepest-level arc
diameter of the limiting map.

Circle points can be given as floats or :class:`Dyadic` values; nearest
breakpoint searches are exact.  Open curves are parametrized by [0, 1]
instead of the circle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .curve import JordanCurve, remetrize_dd
from .division import DEFAULT_TOL
from .dyadic import Dyadic
from .errors import LevelOutOfRange
from .subdivision import (
    CircleHierarchy,
    GammaHierarchy,
    build_circle_hierarchy,
    build_gamma_hierarchy,
)


def lambda_metric(s, t, closed: bool = True):
    """Arc-length distance on the circle [0, 1)/(0 ~ 1); plain |s - t| on [0, 1].

    Exact for :class:`Dyadic` and integer inputs.
    """
    d = s - t if t < s else t - s
    if not closed:
        return d
    other = 1 - d
    return other if other < d else d


@dataclass(frozen=True)
class CurvePoint:
    param: float
    coords: tuple | None = None


@dataclass(frozen=True, eq=False)
class Parametrization:
    curve: JordanCurve
    gamma: GammaHierarchy
    circle: CircleHierarchy

    @property
    def depth(self) -> int:
        return self.gamma.depth

    @property
    def closed(self) -> bool:
        return self.curve.closed

    @cached_property
    def remetrized(self) -> JordanCurve:
        """The curve with its diameter distance as metric, on the vertices."""
        return remetrize_dd(self.curve)

    @property
    def grid(self) -> int:
        """Exponent of the finest circle grid."""
        return self.circle.finest_grid

    @cached_property
    def breakpoint_ticks(self) -> np.ndarray:
        """Deepest-level breakpoints on the grid ``2**-grid``, closed by 1."""
        deep = self.circle.levels[-1]
        return np.append(deep.starts, 1 << deep.grid)

    @cached_property
    def breakpoint_images(self) -> np.ndarray:
        """Curve parameters of the deepest-level breakpoints, closed by the end."""
        return self.gamma.levels[-1].positions

    def breakpoint_map(self, n: int) -> list[tuple[Dyadic, float]]:
        """Pairs (s_j, a_j) for level n."""
        self._check_level(n)
        circ, arcs = self.circle.level(n), self.gamma.level(n)
        return [(circ.breakpoint(j), float(arcs.positions[j])) for j in range(circ.count)]

    def image_params_on_grid(self, ticks: np.ndarray, grid: int) -> np.ndarray:
        """Vectorized snap of circle points ``ticks / 2**grid`` (``grid >= self.grid``)."""
        shift = grid - self.grid
        if shift < 0:
            raise ValueError(f"grid 2^-{grid} is coarser than the circle breakpoints")
        if grid > 62:
            return np.array([self._param_of(Dyadic(int(t), grid)) for t in ticks])
        ticks = np.asarray(ticks, dtype=np.int64)
        if self.closed:
            ticks = ticks % (np.int64(1) << grid)
        bp = self.breakpoint_ticks.astype(np.int64) << shift
        j = np.clip(np.searchsorted(bp, ticks, side="right") - 1, 0, len(bp) - 2)
        go_right = (bp[j + 1] - ticks) < (ticks - bp[j])
        k = j + go_right
        params = self.breakpoint_images[k]
        if self.closed:
            params = np.where(k == len(bp) - 1, 0.0, params)
        return params

    def _param_of(self, s: Dyadic) -> float:
        e = max(self.grid, s.exponent)
        x = s.scaled(e)
        if self.closed:
            x %= 1 << e
        bp = self.breakpoint_ticks
        shift = e - self.grid
        j = int(np.searchsorted(bp, x >> shift, side="right")) - 1
        j = min(max(j, 0), len(bp) - 2)
        left, right = int(bp[j]) << shift, int(bp[j + 1]) << shift
        k = j + 1 if right - x < x - left else j
        if self.closed and k == len(bp) - 1:
            return 0.0
        return float(self.breakpoint_images[k])

    def _check_level(self, n: int):
        if not 1 <= n <= self.depth:
            raise LevelOutOfRange(f"level must lie in [1, {self.depth}], got {n}")

    def dd(self, u, v) -> float:
        """Diameter distance between curve parameters (exact on embedded curves)."""
        return self.curve.dd(u, v)


def build_parametrization(curve: JordanCurve, depth: int, tol: float = DEFAULT_TOL) -> Parametrization:
    """Build both subdivisions down to ``depth`` and pair them.

    Arc diameters are the same in the curve's metric and in its diameter
    distance, so the curve-side subdivision is computed on ``curve`` itself
    and remains exact between vertices.
    """
    gamma = build_gamma_hierarchy(curve, depth, tol)
    return Parametrization(curve, gamma, build_circle_hierarchy(gamma))


def phi_eval(p: Parametrization, s) -> CurvePoint:
    """Image of the circle point ``s`` (float or Dyadic)."""
    if not isinstance(s, Dyadic):
        s = Dyadic.from_float(s)
    if s < 0 or (s > 1 if not p.closed else not s < 1):
        raise ValueError(f"circle point must lie in [0, 1{']' if not p.closed else ')'}, got {s}")
    u = p._param_of(s)
    xy = p.curve.point(u)
    return CurvePoint(u, None if xy is None else tuple(float(c) for c in xy))


def modulus_check(p: Parametrization, n: int, samples: int = 10_000, seed: int = 0) -> dict:
    """Largest image distance among nearby breakpoints at level ``n``.

    Breakpoint pairs at circle distance at most half the smallest level-n
    interval lie in the same or adjacent level-n intervals, so their images
    are within the two arc diameters, hence within 2 * 4**-n * diam.
    Pairs are drawn from the deepest-level breakpoints.
    """
    p._check_level(n)
    circ = p.circle.level(n)
    arcs = p.gamma.level(n)
    G = p.grid
    min_len = 1 << (G - int(circ.exponents.max()))
    window = min_len // 2
    ticks = p.breakpoint_ticks[:-1] if p.closed else p.breakpoint_ticks
    bp = np.asarray(ticks, dtype=object if G > 62 else np.int64)
    m = len(bp)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, m, size=samples)
    offs = rng.integers(-window, window + 1, size=samples)
    target = bp[i] + offs
    period = 1 << G
    if p.closed:
        target = target % period
        ext = np.concatenate([bp, [period]])
    else:
        target = np.clip(target, 0, bp[-1])
        ext = bp
    j = np.searchsorted(ext, target, side="left")
    j = np.minimum(j, len(ext) - 1)
    j = np.where(j == m, 0, j) if p.closed else j
    # the breakpoint at or just after the target; step back if it left the window
    lam = _lambda_ticks(bp[i], bp[j], period, p.closed)
    j = np.where(lam > window, (j - 1) % m, j)
    lam = _lambda_ticks(bp[i], bp[j], period, p.closed)
    imgs = p.breakpoint_images
    diam = p.curve.diameter
    bound = 2.0 * 4.0 ** -n * diam
    level_of = np.searchsorted(np.asarray(circ.starts) << (G - circ.grid), bp, side="right") - 1
    worst = 0.0
    adjacent_violations = 0
    not_adjacent = 0
    for a, b in zip(i, j):
        d = p.dd(imgs[a], imgs[b])
        worst = max(worst, d)
        ja, jb = int(level_of[a]), int(level_of[b])
        cap = arcs.diameters[ja] + arcs.diameters[jb]
        if ja != jb and not _adjacent(ja, jb, circ.count, p.closed):
            not_adjacent += 1
        if d > cap * (1.0 + p.gamma.tol):
            adjacent_violations += 1
    tol = p.gamma.tol * diam
    return {
        "level": n,
        "max_distance": worst,
        "bound": bound,
        "samples": int(samples),
        "max_lambda_ticks": int(lam.max()) if samples else 0,
        "adjacent_violations": adjacent_violations,
        "not_adjacent": not_adjacent,
        "passed": worst <= bound + tol and adjacent_violations == 0 and not_adjacent == 0,
    }


def _lambda_ticks(a, b, period, closed):
    d = np.abs(np.asarray(a) - np.asarray(b))
    return np.minimum(d, period - d) if closed else d


def _adjacent(a: int, b: int, count: int, closed: bool) -> bool:
    if abs(a - b) == 1:
        return True
    return closed and {a, b} == {0, count - 1}
