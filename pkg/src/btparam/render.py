"""SVG figure of an embedded curve with its subdivision points."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .errors import InputError
from .parametrization import Parametrization

PALETTE = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def render_svg(p: Parametrization, levels=None, size: int = 640, margin: int = 24) -> str:
    """Polyline of the curve; level-n arc endpoints as dots, one colour per level.

    Coarser levels are drawn last with larger dots so that shared endpoints
    show their coarsest level.  The basepoint gets a ring and a label.
    """
    curve = p.curve
    if not curve.embedded:
        raise InputError("only curves with coordinates can be rendered")
    levels = list(range(1, p.depth + 1)) if levels is None else sorted(set(levels))
    for n in levels:
        p._check_level(n)
    X = curve.coords
    X = X[:, :2] if X.shape[1] >= 2 else np.column_stack([X[:, 0], np.zeros(len(X))])
    lo, hi = X.min(axis=0), X.max(axis=0)
    scale = (size - 2 * margin) / max(float((hi - lo).max()), 1e-300)

    def xy(pt):
        pt = np.asarray(pt, dtype=float)
        pt = pt[:2] if len(pt) >= 2 else np.array([pt[0], 0.0])
        return margin + (pt[0] - lo[0]) * scale, size - margin - (pt[1] - lo[1]) * scale

    pts = [xy(q) for q in X]
    if curve.closed:
        pts.append(pts[0])
    path = " ".join(f"{a:.3f},{b:.3f}" for a, b in pts)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<polyline points="{path}" fill="none" stroke="#444" stroke-width="1"/>',
    ]
    for rank, n in enumerate(reversed(levels)):
        colour = PALETTE[(n - 1) % len(PALETTE)]
        r = 1.5 + 1.2 * (len(levels) - 1 - rank)
        out.append(f'<g id="level-{n}" fill="{colour}">')
        for u in p.gamma.level(n).endpoints:
            a, b = xy(curve.point(float(u)))
            out.append(f'<circle cx="{a:.3f}" cy="{b:.3f}" r="{r:.2f}"/>')
        out.append("</g>")
    a, b = xy(curve.point(0.0))
    out.append(f'<circle id="basepoint" cx="{a:.3f}" cy="{b:.3f}" r="7" fill="none" stroke="black" stroke-width="2"/>')
    out.append(f'<text x="{a + 9:.3f}" y="{b - 9:.3f}" font-size="12" font-family="sans-serif">{escape("a0")}</text>')
    y = margin
    for n in levels:
        colour = PALETTE[(n - 1) % len(PALETTE)]
        out.append(f'<circle cx="{size - 90}" cy="{y}" r="4" fill="{colour}"/>')
        out.append(f'<text x="{size - 80}" y="{y + 4}" font-size="11" font-family="sans-serif">level {n}</text>')
        y += 16
    out.append("</svg>")
    return "\n".join(out) + "\n"
