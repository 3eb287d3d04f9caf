"""File formats: curve JSON, CSV distance matrices, subdivision and breakpoint exports."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .curve import JordanCurve, curve_from_distance_matrix, curve_from_points
from .errors import BtParamError, InputError
from .parametrization import Parametrization


def curve_from_dict(data: dict) -> JordanCurve:
    if not isinstance(data, dict):
        raise InputError("curve JSON must be an object")
    closed = data.get("closed", True)
    if not isinstance(closed, bool):
        raise InputError("'closed' must be true or false")
    if ("points" in data) == ("matrix" in data):
        raise InputError("curve JSON needs exactly one of 'points' or 'matrix'")
    try:
        if "points" in data:
            return curve_from_points(np.asarray(data["points"], dtype=float), closed=closed)
        return curve_from_distance_matrix(np.asarray(data["matrix"], dtype=float), closed=closed)
    except BtParamError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed curve data: {exc}") from exc


def curve_to_dict(curve: JordanCurve) -> dict:
    if curve.embedded:
        return {"closed": curve.closed, "points": curve.coords.tolist()}
    return {"closed": curve.closed, "matrix": curve.matrix.tolist()}


def read_curve(path, closed: bool = True) -> JordanCurve:
    """Curve JSON, or a header-free square CSV distance matrix (``closed`` applies)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    if path.suffix.lower() == ".csv":
        return curve_from_distance_matrix(read_matrix_csv(text), closed=closed)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    return curve_from_dict(data)


def read_matrix_csv(text: str) -> np.ndarray:
    try:
        rows = [[float(v) for v in row] for row in csv.reader(io.StringIO(text)) if row]
    except ValueError as exc:
        raise InputError(f"non-numeric entry in distance matrix: {exc}") from exc
    if not rows or any(len(r) != len(rows) for r in rows):
        raise InputError("distance matrix CSV must be square")
    return np.array(rows)


def write_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def hierarchy_export(p: Parametrization) -> dict:
    """Both subdivisions, level by level; circle values as exact "num/2^exp" strings."""
    levels = []
    for n in range(1, p.depth + 1):
        circ, arcs = p.circle.level(n), p.gamma.level(n)
        levels.append(
            {
                "level": n,
                "breakpoints": [str(b) for b in circ.breakpoints()],
                "lengths": [str(w) for w in circ.lengths()],
                "middle": [bool(m) for m in circ.middle],
                "parents": [int(i) for i in arcs.parents],
                "endpoints": [float(u) for u in arcs.endpoints],
                "diameters": [float(d) for d in arcs.diameters],
            }
        )
    return {
        "closed": p.closed,
        "depth": p.depth,
        "diameter": p.curve.diameter,
        "levels": levels,
    }


def _coord_names(dim: int) -> list[str]:
    if dim <= 3:
        return ["a_" + "xyz"[i] for i in range(dim)]
    return [f"a_c{i}" for i in range(dim)]


def breakpoint_rows(p: Parametrization) -> list[dict]:
    """One row per (level, j): the circle breakpoint and its image on the curve."""
    dim = p.curve.coords.shape[1] if p.curve.embedded else 0
    names = _coord_names(dim)
    rows = []
    for n in range(1, p.depth + 1):
        for j, (s, a) in enumerate(p.breakpoint_map(n)):
            row = {"level": n, "j": j, "s": str(s), "s_float": float(s), "a_param": a}
            if dim:
                row.update(zip(names, (float(c) for c in p.curve.point(a))))
            rows.append(row)
    return rows


def breakpoints_csv(p: Parametrization) -> str:
    rows = breakpoint_rows(p)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()
