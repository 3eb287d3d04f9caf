"""Nested subdivisions of the curve and matching dyadic subdivisions of the circle.

Levels are numbered from 1.  On the curve side level ``n`` is a list of
consecutive arcs given by their endpoint parameters, the first endpoint being
the basepoint.  On the circle side every interval length is a power of two,
so a level is stored as integer length exponents plus integer left endpoints
on the grid ``2**-grid``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .curve import ArcSpan, JordanCurve
from .division import DEFAULT_TOL, smallest_count_below
from .dyadic import Dyadic
from .errors import BadChildCount, DegenerateSpan, DepthExceedsResolution

#: finest arcs must be at least this fraction of the curve's diameter
MIN_RELATIVE_DIAMETER = 1e-9


@dataclass(frozen=True, eq=False)
class GammaLevel:
    """One level of the curve subdivision.

    ``positions`` has one more entry than there are arcs: arc ``j`` runs
    from ``positions[j]`` to ``positions[j + 1]``.  ``parents[j]`` indexes
    the enclosing arc one level up (all zero on level 1).
    """

    positions: np.ndarray
    diameters: np.ndarray
    parents: np.ndarray

    @property
    def count(self) -> int:
        return len(self.diameters)

    @property
    def endpoints(self) -> np.ndarray:
        """The arc endpoints a_0, ..., a_{N-1}; a_0 is the basepoint."""
        return self.positions[:-1]

    def arc(self, j: int) -> ArcSpan:
        return ArcSpan(float(self.positions[j]), float(self.positions[j + 1]))


@dataclass(frozen=True, eq=False)
class GammaHierarchy:
    curve: JordanCurve
    levels: list[GammaLevel]
    tol: float = DEFAULT_TOL

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, n: int) -> GammaLevel:
        return self.levels[n - 1]

    def child_counts(self, n: int) -> np.ndarray:
        """Number of level-(n+1) children of every level-n arc."""
        return np.bincount(self.level(n + 1).parents, minlength=self.level(n).count)

    def parent_map(self, n: int) -> np.ndarray:
        return self.level(n).parents


def build_gamma_hierarchy(curve: JordanCurve, depth: int, tol: float = DEFAULT_TOL) -> GammaHierarchy:
    """Curve subdivision down to ``depth`` levels.

    Level 1 splits the whole curve, cut open at the basepoint, into the
    fewest equal-diameter arcs of diameter at most diam/4.  Every later
    level splits each arc into the fewest equal-diameter pieces of diameter
    at most a quarter of the smallest diameter on the level above.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    diam = curve.diameter
    spans = [(0.0, 1.0)]
    delta = diam / 4.0
    levels: list[GammaLevel] = []
    for n in range(1, depth + 1):
        positions, diams, parents = [], [], []
        for i, (u0, u1) in enumerate(spans):
            try:
                _, res = smallest_count_below(curve, ArcSpan(u0, u1), delta, tol)
            except DegenerateSpan as exc:
                raise DepthExceedsResolution(
                    f"level {n} needs more vertices than the curve has: {exc}"
                ) from exc
            if res.resolution_limited:
                raise DepthExceedsResolution(
                    f"level {n}: equal-diameter division limited by vertex resolution"
                )
            positions.extend(res.positions[:-1])
            diams.extend(res.diameters)
            parents.extend([i] * res.count)
        positions.append(1.0)
        level = GammaLevel(
            positions=_frozen(np.array(positions)),
            diameters=_frozen(np.array(diams)),
            parents=_frozen(np.array(parents, dtype=np.int64)),
        )
        if level.diameters.min() < MIN_RELATIVE_DIAMETER * diam or np.any(np.diff(level.positions) <= 0):
            raise DepthExceedsResolution(f"level {n} arcs fall below the numeric resolution")
        levels.append(level)
        spans = list(zip(level.positions[:-1], level.positions[1:]))
        delta = float(level.diameters.min()) / 4.0
    return GammaHierarchy(curve, levels, tol)


# -- circle side ------------------------------------------------------------------


def _child_exponents(N: int) -> list[int]:
    """Child lengths of an interval as exponents k (length 2**-k of the parent)."""
    if N < 4:
        raise BadChildCount(f"every interval needs at least 4 children, got {N}")
    if N % 2 == 0:
        h = N // 2
        left = list(range(2, h + 1)) + [h]
        return left + left[::-1]
    m = (N + 1) // 2
    even = _child_exponents(N + 1)
    return even[: m - 1] + [m - 1] + even[m + 1 :]


def dyadic_child_lengths(N: int) -> list[Dyadic]:
    """Lengths of the N children of an interval, as fractions of its length.

    Even N: the left half is cut into 1/4, 1/8, ..., 2^-(N/2), 2^-(N/2)
    and the right half mirrors it.  Odd N: the pattern for N+1 with its two
    middle pieces merged.
    """
    return [Dyadic.pow2(k) for k in _child_exponents(N)]


def middle_children(N: int) -> tuple[int, ...]:
    """Indices of the children containing the parent's midpoint."""
    if N < 4:
        raise BadChildCount(f"every interval needs at least 4 children, got {N}")
    return (N // 2 - 1, N // 2) if N % 2 == 0 else (N // 2,)


@dataclass(frozen=True, eq=False)
class CircleLevel:
    """One level of the circle subdivision.

    Interval ``j`` has length ``2**-exponents[j]`` and starts at
    ``starts[j] / 2**grid``.
    """

    exponents: np.ndarray
    grid: int
    starts: np.ndarray
    parents: np.ndarray
    middle: np.ndarray

    @property
    def count(self) -> int:
        return len(self.exponents)

    @cached_property
    def ends(self) -> np.ndarray:
        return _frozen(self.starts + _pow2_on_grid(self.exponents, self.grid))

    def breakpoint(self, j: int) -> Dyadic:
        return Dyadic(int(self.starts[j]), self.grid)

    def length(self, j: int) -> Dyadic:
        return Dyadic.pow2(int(self.exponents[j]))

    def breakpoints(self) -> list[Dyadic]:
        return [self.breakpoint(j) for j in range(self.count)]

    def lengths(self) -> list[Dyadic]:
        return [self.length(j) for j in range(self.count)]

    def breakpoints_float(self) -> np.ndarray:
        return np.array([float(b) for b in self.breakpoints()])


@dataclass(frozen=True, eq=False)
class CircleHierarchy:
    levels: list[CircleLevel]
    closed: bool = True
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, n: int) -> CircleLevel:
        return self.levels[n - 1]

    def child_counts(self, n: int) -> np.ndarray:
        return np.bincount(self.level(n + 1).parents, minlength=self.level(n).count)

    def parent_map(self, n: int) -> np.ndarray:
        return self.level(n).parents

    @property
    def finest_grid(self) -> int:
        return self.levels[-1].grid


def build_circle_hierarchy(gamma: GammaHierarchy) -> CircleHierarchy:
    """Dyadic circle subdivision with the same parent/child pattern as ``gamma``."""
    counts = [np.array([gamma.level(1).count])]
    counts += [gamma.child_counts(n) for n in range(1, gamma.depth)]
    return circle_hierarchy_from_counts(counts, closed=gamma.curve.closed)


def circle_hierarchy_from_counts(counts: list, closed: bool = True) -> CircleHierarchy:
    """Circle subdivision from per-level child counts.

    ``counts[0]`` holds the single count for the whole circle, treated as
    one interval anchored at 0; ``counts[n]`` the child counts of level n.
    """
    levels: list[CircleLevel] = []
    parent_exps = np.array([0], dtype=np.int64)
    for cnt in counts:
        cnt = np.asarray(cnt, dtype=np.int64)
        if len(cnt) != len(parent_exps):
            raise ValueError("child counts do not match the number of intervals")
        exps, parents, middle = [], [], []
        for i, (k, N) in enumerate(zip(parent_exps, cnt)):
            pattern = _child_exponents(int(N))
            mids = middle_children(int(N))
            exps.extend(int(k) + e for e in pattern)
            parents.extend([i] * len(pattern))
            middle.extend(c in mids for c in range(len(pattern)))
        exps = np.array(exps, dtype=np.int64)
        grid = int(exps.max())
        steps = _pow2_on_grid(exps, grid)
        starts = np.concatenate([[0], np.cumsum(steps)[:-1]]).astype(steps.dtype)
        if int(starts[-1]) + int(steps[-1]) != 1 << grid:
            raise AssertionError("circle level does not tile [0, 1]")
        levels.append(
            CircleLevel(
                exponents=_frozen(exps),
                grid=grid,
                starts=_frozen(starts),
                parents=_frozen(np.array(parents, dtype=np.int64)),
                middle=_frozen(np.array(middle, dtype=bool)),
            )
        )
        parent_exps = exps
    return CircleHierarchy(levels, closed=closed)


def _pow2_on_grid(exps: np.ndarray, grid: int) -> np.ndarray:
    """2**(grid - k) for every k, as int64 when it fits, else Python ints."""
    if grid <= 62:
        return np.left_shift(np.int64(1), grid - exps.astype(np.int64))
    return np.array([1 << (grid - int(k)) for k in exps], dtype=object)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a
