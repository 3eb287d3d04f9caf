"""Deterministic fixture curves."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curve import JordanCurve, curve_from_points
from .errors import BadParams

KINDS = (
    "circle",
    "regular_polygon",
    "square",
    "segment",
    "l_arc",
    "koch_snowflake",
    "snowflake_family",
    "random_bt",
)
ALIASES = {"koch": "koch_snowflake", "polygon": "regular_polygon", "snowflake": "snowflake_family"}
MAX_KOCH_LEVEL = 7
KOCH_HEIGHT = np.sqrt(3.0) / 6.0


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)


def generate_curve(spec: GeneratorSpec) -> JordanCurve:
    kind = ALIASES.get(spec.kind, spec.kind)
    if kind not in KINDS:
        raise BadParams(f"unknown curve kind {spec.kind!r}; expected one of {', '.join(KINDS)}")
    try:
        pts, closed = _BUILDERS[kind](**spec.params)
    except TypeError as exc:
        raise BadParams(f"bad parameters for {kind}: {exc}") from exc
    return curve_from_points(pts, closed=closed)


def circle_points(n=256, radius=1.0):
    _require(int(n) == n and n >= 3, "circle needs an integer n >= 3")
    _require(radius > 0, "radius must be positive")
    t = 2.0 * np.pi * np.arange(int(n)) / int(n)
    return radius * np.column_stack([np.cos(t), np.sin(t)]), True


def polygon_points(n=6, radius=1.0):
    return circle_points(n, radius)


def square_points(side=1.0, per_side=64):
    """Boundary of [0, side]^2, counter-clockwise from the origin."""
    _require(int(per_side) == per_side and per_side >= 1, "per_side must be a positive integer")
    _require(side > 0, "side must be positive")
    k = int(per_side)
    t = np.arange(k) / k
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])
    pts = [corners[i] + t[:, None] * (corners[i + 1] - corners[i]) for i in range(4)]
    return side * np.vstack(pts), True


def segment_points(n=2, length=1.0):
    _require(int(n) == n and n >= 2, "segment needs an integer n >= 2")
    _require(length > 0, "length must be positive")
    x = np.linspace(0.0, length, int(n))
    return np.column_stack([x, np.zeros_like(x)]), False


def l_arc_points(per_leg=1):
    """Open L-shaped arc (0,0) -> (1,0) -> (1,1)."""
    _require(int(per_leg) == per_leg and per_leg >= 1, "per_leg must be a positive integer")
    t = np.arange(int(per_leg)) / int(per_leg)
    leg1 = np.column_stack([t, np.zeros_like(t)])
    leg2 = np.column_stack([np.ones_like(t), t])
    return np.vstack([leg1, leg2, [[1.0, 1.0]]]), False


def koch_points(level=4, size=1.0):
    return snowflake_points(KOCH_HEIGHT, level, size)


def snowflake_points(p=KOCH_HEIGHT, level=4, size=1.0):
    """Triangle whose edges are recursively replaced by four edges.

    Each edge A -> B becomes A, A + (B-A)/3, apex, A + 2(B-A)/3 with the apex
    pushed outward from the midpoint by ``p * |B - A|``.  ``p = sqrt(3)/6``
    gives the Koch snowflake.
    """
    _require(0.0 < p < 0.5, "displacement p must lie in (0, 1/2)")
    _require(int(level) == level and 0 <= level <= MAX_KOCH_LEVEL,
             f"level must be an integer in [0, {MAX_KOCH_LEVEL}]")
    ang = np.pi / 2 + 2.0 * np.pi * np.arange(3) / 3
    pts = size / np.sqrt(3.0) * np.column_stack([np.cos(ang), np.sin(ang)])
    for _ in range(int(level)):
        A = pts
        B = np.roll(pts, -1, axis=0)
        d = B - A
        normal = np.column_stack([d[:, 1], -d[:, 0]])
        new = np.empty((4 * len(A), 2))
        new[0::4] = A
        new[1::4] = A + d / 3.0
        new[2::4] = A + d / 2.0 + p * normal
        new[3::4] = A + 2.0 * d / 3.0
        pts = new
    return pts, True


def random_bt_points(seed=42, level=6, cap=0.15, base=6):
    """Seeded midpoint displacement of a regular polygon.

    Each round inserts every edge midpoint, pushed along the edge normal by a
    uniform fraction in [-cap, cap] of the edge length.  A small cap keeps
    the turning bounded.
    """
    _require(0.0 < cap <= 0.25, "cap must lie in (0, 1/4]")
    _require(int(level) == level and 0 <= level <= 10, "level must be an integer in [0, 10]")
    _require(int(base) == base and base >= 3, "base must be an integer >= 3")
    rng = np.random.default_rng(seed)
    pts, _ = circle_points(int(base))
    for _ in range(int(level)):
        B = np.roll(pts, -1, axis=0)
        d = B - pts
        normal = np.column_stack([d[:, 1], -d[:, 0]])
        mids = pts + 0.5 * d + rng.uniform(-cap, cap, size=(len(pts), 1)) * normal
        new = np.empty((2 * len(pts), 2))
        new[0::2] = pts
        new[1::2] = mids
        pts = new
    return pts, True


def fixture(name: str) -> JordanCurve:
    """Named fixtures used throughout the tests and the acceptance suite."""
    table = {
        "circle-256": GeneratorSpec("circle", {"n": 256}),
        "square": GeneratorSpec("square", {}),
        "koch-3": GeneratorSpec("koch_snowflake", {"level": 3}),
        "koch-4": GeneratorSpec("koch_snowflake", {"level": 4}),
        "random_bt-42": GeneratorSpec("random_bt", {"seed": 42}),
        "segment": GeneratorSpec("segment", {}),
        "l_arc": GeneratorSpec("l_arc", {}),
    }
    if name not in table:
        raise BadParams(f"unknown fixture {name!r}")
    return generate_curve(table[name])


def _require(cond, msg):
    if not cond:
        raise BadParams(msg)


_BUILDERS = {
    "circle": circle_points,
    "regular_polygon": polygon_points,
    "square": square_points,
    "segment": segment_points,
    "l_arc": l_arc_points,
    "koch_snowflake": koch_points,
    "snowflake_family": snowflake_points,
    "random_bt": random_bt_points,
}
