"""Numerical certification of the parametrization and its subdivisions.

Circle-side checks are exact: circle points are sampled on an integer grid
``2**-grid`` a few bits finer than the finest breakpoint grid, so all
containment and length comparisons are integer comparisons.

A query for the largest subdivision interval inside ``[x, y]`` only sees the
stored levels.  It is flagged as truncated when a deeper, unstored interval
could beat the stored answer; sampled checks skip such queries and count them.
"""

from __future__ import annotations

import json
import os
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .curve import EXACT_TOL, JordanCurve, bounded_turning_constant, remetrize_dd
from .division import DEFAULT_TOL
from .dyadic import Dyadic
from .errors import BadConstant, BtParamError, NoneContained
from .parametrization import Parametrization, build_parametrization, modulus_check
from .subdivision import CircleHierarchy, GammaHierarchy

#: 32 * 2 * 16**4, the proven weak-quasisymmetry constant in the diameter distance
H_BOUND = 32 * 2 * 16**4
INTERVAL_RATIO_BOUND = 12
LEVEL_GAP_BOUND = 4
#: sampled intervals shorter than this many finest intervals are skipped
GUARD_FACTOR = 4
#: extra grid bits for sampling between breakpoints
EXTRA_BITS = 6
CHUNK = 2500
EXHAUSTIVE_DEPTH = 3


def worker_count() -> int:
    env = os.environ.get("BTPARAM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _chunked(samples: int, seed: int, stream: int, fn):
    """Run ``fn(rng, count)`` over fixed-size chunks with derived seeds.

    Chunk boundaries and seeds depend only on (samples, seed, stream), so
    the results are the same for any number of workers.
    """
    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)
    seqs = np.random.SeedSequence([seed, stream]).spawn(len(sizes))
    jobs = [(np.random.default_rng(s), k) for s, k in zip(seqs, sizes)]
    workers = min(worker_count(), len(jobs)) or 1
    if workers == 1:
        return [fn(r, k) for r, k in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


# -- largest contained interval -----------------------------------------------------


@dataclass(frozen=True)
class DeltaQuery:
    """Largest stored subdivision interval inside ``[x, y]``.

    ``interval`` is the query as exact dyadic endpoints; the answer is
    interval ``best_interval`` of level ``best_level`` with length ``delta``.
    ``truncated`` is set when a deeper, unstored level might contain a
    longer interval.
    """

    interval: tuple[Dyadic, Dyadic]
    best_level: int
    best_interval: int
    delta: Dyadic
    truncated: bool


def _sparse_argmin(vals: np.ndarray) -> np.ndarray:
    """Table whose row k holds the leftmost argmin over windows of 2**k."""
    n = len(vals)
    K = max(1, n.bit_length())
    table = np.zeros((K, n), dtype=np.int64)
    table[0] = np.arange(n)
    for k in range(1, K):
        w = 1 << k
        if w > n:
            break
        a = table[k - 1, : n - w + 1]
        b = table[k - 1, w // 2 : w // 2 + n - w + 1]
        table[k, : n - w + 1] = np.where(vals[b] < vals[a], b, a)
    return table


class IntervalIndex:
    """Range queries over every stored level of a circle subdivision."""

    def __init__(self, circle: CircleHierarchy, extra_bits: int = EXTRA_BITS):
        self.circle = circle
        self.closed = circle.closed
        self.grid = circle.finest_grid + extra_bits
        self.dtype = np.int64 if self.grid <= 62 else object
        self.period = 1 << self.grid
        self.levels = []
        for lvl in circle.levels:
            shift = self.grid - lvl.grid
            starts = np.array([int(s) << shift for s in lvl.starts], dtype=self.dtype)
            lengths = np.array([1 << (self.grid - int(k)) for k in lvl.exponents], dtype=self.dtype)
            exps = np.asarray(lvl.exponents, dtype=np.int64)
            self.levels.append((starts, starts + lengths, exps, _sparse_argmin(exps), lvl.parents))
        deep = circle.levels[-1]
        self.finest = 1 << (self.grid - int(deep.exponents.max()))
        self.guard = GUARD_FACTOR * self.finest
        n_max = max(len(lv[2]) for lv in self.levels)
        self._log2 = np.zeros(n_max + 2, dtype=np.int64)
        for i in range(2, n_max + 2):
            self._log2[i] = self._log2[i // 2] + 1

    def length_ticks(self, exps):
        exps = np.asarray(exps, dtype=np.int64)
        if self.dtype is object:
            return np.array([1 << (self.grid - int(k)) for k in exps], dtype=object)
        return np.left_shift(np.int64(1), self.grid - exps)

    def _range_argmin(self, level, lo, hi):
        _, _, exps, table, _ = self.levels[level]
        length = np.maximum(hi - lo + 1, 1)
        k = self._log2[length]
        lo_c = np.clip(lo, 0, len(exps) - 1)
        hi_c = np.clip(hi - (1 << k) + 1, 0, len(exps) - 1)
        a = table[k, lo_c]
        b = table[k, hi_c]
        return np.where(exps[b] < exps[a], b, a)

    def query(self, x, L):
        """Vectorized query for ``[x, x + L]`` (ticks; wraps past 1 on closed circles).

        Returns (level, index, exponent, truncated) arrays; level is 0 and
        exponent is a large sentinel when nothing is contained.
        """
        x = np.asarray(x, dtype=self.dtype)
        L = np.asarray(L, dtype=self.dtype)
        y = x + L
        period = self.period
        none = np.int64(1 << 40)
        best_exp = np.full(len(x), none, dtype=np.int64)
        best_lvl = np.zeros(len(x), dtype=np.int64)
        best_idx = np.full(len(x), -1, dtype=np.int64)
        y_in = np.minimum(y, period)
        wraps = y > period if self.closed else np.zeros(len(x), dtype=bool)
        y_wrap = np.where(wraps, y - period, 0)
        for n, (starts, ends, exps, _, _) in enumerate(self.levels, start=1):
            lo = np.searchsorted(starts, x, side="left")
            hi = np.searchsorted(ends, y_in, side="right") - 1
            ok = lo <= hi
            cand = self._range_argmin(n - 1, lo, hi)
            cand_exp = np.where(ok, exps[cand], none)
            if self.closed and wraps.any():
                hi2 = np.searchsorted(ends, y_wrap, side="right") - 1
                ok2 = wraps & (hi2 >= 0)
                cand2 = self._range_argmin(n - 1, np.zeros_like(hi2), hi2)
                exp2 = np.where(ok2, exps[cand2], none)
                use2 = exp2 <= cand_exp
                cand = np.where(use2, cand2, cand)
                cand_exp = np.where(use2, exp2, cand_exp)
            better = cand_exp < best_exp
            best_exp = np.where(better, cand_exp, best_exp)
            best_lvl = np.where(better, n, best_lvl)
            best_idx = np.where(better, cand, best_idx)
        truncated = self._truncated(x, y, best_exp)
        return best_lvl, best_idx, best_exp, truncated

    def _truncated(self, x, y, best_exp):
        """Could an unstored child of a partly covered deepest interval be longer?"""
        starts, ends, exps, _, _ = self.levels[-1]
        period = self.period
        i = np.searchsorted(starts, x, side="right") - 1
        partial_x = starts[i] < x
        y_eff = np.where(y > period, y - period, y) if self.closed else y
        i2 = np.minimum(np.searchsorted(ends, y_eff, side="left"), len(ends) - 1)
        partial_y = (starts[i2] < y_eff) & (y_eff < ends[i2])
        return (partial_x & (exps[i] + 2 < best_exp)) | (partial_y & (exps[i2] + 2 < best_exp))

    def covered(self, x, L, level, idx):
        """Is ``[x, x + L]`` inside the parent of the answer united with a neighbour of it?"""
        x = np.asarray(x, dtype=self.dtype)
        L = np.asarray(L, dtype=self.dtype)
        out = np.ones(len(x), dtype=bool)
        period = self.period
        for n in np.unique(level):
            sel = level == n
            if n <= 1:
                continue
            starts, ends, exps, _, _ = self.levels[n - 2]
            parents = self.levels[n - 1][4]
            P = parents[idx[sel]]
            count = len(starts)
            ok = np.zeros(int(sel.sum()), dtype=bool)
            for step in (-1, 0, 1):
                Q = P + step
                if self.closed:
                    Q = Q % count
                valid = (Q >= 0) & (Q < count)
                Qc = np.clip(Q, 0, count - 1)
                a = np.where(step < 0, starts[Qc], starts[P])
                span = self.length_ticks(exps[P]) + np.where(step != 0, self.length_ticks(exps[Qc]), 0)
                off = x[sel] - a
                off = off % period if self.closed else off
                ok |= valid & (off >= 0) & (off + L[sel] <= span)
            out[sel] = ok
        return out

    def to_ticks(self, value) -> int:
        d = value if isinstance(value, Dyadic) else Dyadic.from_float(value)
        return d.scaled(self.grid)


def largest_contained_interval(circle: CircleHierarchy, x, y, index: IntervalIndex | None = None) -> DeltaQuery:
    """The longest stored interval inside ``[x, y]``, running positively from x.

    On the circle ``y <= x`` means the interval passes 0.  Ties go to the
    coarsest level, then to the smallest index.
    """
    dx = x if isinstance(x, Dyadic) else Dyadic.from_float(x)
    dy = y if isinstance(y, Dyadic) else Dyadic.from_float(y)
    if dx == dy:
        raise ValueError("the interval [x, y] is degenerate")
    ext = max(dx.exponent, dy.exponent) - circle.finest_grid
    if index is None or index.grid < circle.finest_grid + max(ext, 0):
        index = IntervalIndex(circle, extra_bits=max(ext, 0))
    xt, yt = index.to_ticks(dx), index.to_ticks(dy)
    L = yt - xt
    if L <= 0:
        if not circle.closed:
            raise ValueError("on [0, 1] the interval needs x < y")
        L += index.period
    lvl, idx, exp, trunc = index.query(np.array([xt], dtype=index.dtype), np.array([L], dtype=index.dtype))
    if lvl[0] == 0:
        raise NoneContained(f"no stored interval fits inside [{dx}, {dy}]")
    return DeltaQuery((dx, dy), int(lvl[0]), int(idx[0]), Dyadic.pow2(int(exp[0])), bool(trunc[0]))


def _sample_intervals(index: IntervalIndex, rng, count: int, max_len: int):
    """Intervals (x, L) on the tick grid, half of them snapped near breakpoints.

    Lengths are log-uniform in [guard, max_len]; snapped endpoints sit on a
    random stored breakpoint or one tick to either side of it.
    """
    period = index.period
    lo = np.log(index.guard)
    hi = np.log(max_len)
    L = np.exp(rng.uniform(lo, hi, count)).astype(np.int64)
    L = np.clip(L, index.guard, max_len)
    x = rng.integers(0, period, count)
    snap = rng.random(count) < 0.5
    if snap.any():
        lvl_pick = rng.integers(0, len(index.levels), count)
        xs = np.empty(count, dtype=np.int64)
        ys = np.empty(count, dtype=np.int64)
        for n, (starts, ends, *_rest) in enumerate(index.levels):
            sel = lvl_pick == n
            k = int(sel.sum())
            xs[sel] = starts[rng.integers(0, len(starts), k)]
            ys[sel] = ends[rng.integers(0, len(ends), k)]
        xs = xs + rng.integers(-1, 2, count)
        ys = ys + rng.integers(-1, 2, count)
        Ls = (ys - xs) % period if index.closed else ys - xs
        ok = (Ls >= index.guard) & (Ls <= max_len)
        use = snap & ok
        x = np.where(use, xs % period if index.closed else xs, x)
        L = np.where(use, Ls, L)
    if not index.closed:
        x = np.clip(x, 0, period - L)
    return x.astype(np.int64), L.astype(np.int64)


def check_interval_estimate(circle: CircleHierarchy, samples: int = 10_000, seed: int = 0,
                            index: IntervalIndex | None = None) -> dict:
    """Ratio of interval length to its largest contained stored interval.

    Asserts the ratio stays at most 12, that the stored answer is inside the
    interval, and that the interval is covered by the answer's parent united
    with the parent or one of its neighbours.
    """
    index = index or IntervalIndex(circle)
    if index.dtype is object:
        raise NotImplementedError("sampling needs a grid of at most 62 bits")
    max_len = index.period - 1 if circle.closed else index.period

    def run(rng, count):
        x, L = _sample_intervals(index, rng, count, max_len)
        lvl, idx, exp, trunc = index.query(x, L)
        found = lvl > 0
        use = found & ~trunc
        delta = np.where(use, index.length_ticks(np.where(use, exp, 0)), 1)
        ratio = np.where(use, L / delta, 0.0)
        contain_bad = int(np.sum(use & (delta > L)))
        cover = index.covered(x[use], L[use], lvl[use], idx[use])
        k = int(np.argmax(ratio)) if count else 0
        return {
            "max_ratio": float(ratio[k]) if count else 0.0,
            "argmax": (int(x[k]), int(L[k])) if count else None,
            "used": int(use.sum()),
            "skipped_truncated": int(np.sum(found & trunc) + np.sum(~found)),
            "containment_violations": contain_bad,
            "covering_failures": int(np.sum(~cover)),
        }

    parts = _chunked(samples, seed, 1, run)
    best = max(parts, key=lambda d: d["max_ratio"]) if parts else {"max_ratio": 0.0, "argmax": None}
    out = {
        "max_ratio": best["max_ratio"],
        "argmax_ticks": best["argmax"],
        "grid": index.grid,
        "samples": samples,
        "used": sum(p["used"] for p in parts),
        "skipped_truncated": sum(p["skipped_truncated"] for p in parts),
        "containment_violations": sum(p["containment_violations"] for p in parts),
        "covering_failures": sum(p["covering_failures"] for p in parts),
    }
    out["passed"] = (
        out["max_ratio"] <= INTERVAL_RATIO_BOUND
        and out["containment_violations"] == 0
        and out["covering_failures"] == 0
    )
    return out


# -- level gap ----------------------------------------------------------------------


def _gap_of(index: IntervalIndex, x, t):
    """|m - n| for the halves [x - t, x] and [x, x + t]; -1 where not measurable."""
    period = index.period
    left = (x - t) % period if index.closed else x - t
    lvl_l, _, _, tr_l = index.query(left, t)
    lvl_r, _, _, tr_r = index.query(x, t)
    ok = (lvl_l > 0) & (lvl_r > 0) & ~tr_l & ~tr_r & (t >= index.guard)
    if not index.closed:
        ok &= (x - t >= 0) & (x + t <= period)
    return np.where(ok, np.abs(lvl_l - lvl_r), -1)


def check_level_gap(circle: CircleHierarchy, samples: int = 10_000, seed: int = 0,
                    index: IntervalIndex | None = None) -> dict:
    """Largest level difference between the answers for two adjacent equal intervals."""
    index = index or IntervalIndex(circle)
    half = index.period // 2

    def run(rng, count):
        x, t = _sample_intervals(index, rng, count, half)
        if not index.closed:
            t = np.minimum(t, np.maximum(np.minimum(x, index.period - x), 1))
        gaps = _gap_of(index, x, t)
        return Counter(int(g) for g in gaps)

    hist = Counter()
    for part in _chunked(samples, seed, 2, run):
        hist.update(part)
    skipped = hist.pop(-1, 0)
    worst = max(hist) if hist else 0
    return {
        "max_gap": worst,
        "histogram": {str(k): hist[k] for k in sorted(hist)},
        "samples": samples,
        "skipped": skipped,
        "passed": worst <= LEVEL_GAP_BOUND,
    }


def level_gap_exhaustive(circle: CircleHierarchy, max_depth: int = EXHAUSTIVE_DEPTH) -> dict:
    """Level gaps for every pair of breakpoints x, x + t with 0 < t <= 1/2.

    Only the first ``max_depth`` levels are used.
    """
    sub = CircleHierarchy(circle.levels[:max_depth], closed=circle.closed)
    index = IntervalIndex(sub)
    starts = index.levels[-1][0]
    pts = np.append(starts, index.period) if not sub.closed else starts
    half = index.period // 2
    hist = Counter()
    for i in range(0, len(pts), 64):
        xs = pts[i : i + 64]
        diff = (pts[None, :] - xs[:, None])
        t = diff % index.period if sub.closed else np.abs(diff)
        x = np.repeat(xs, len(pts))
        t = t.ravel()
        keep = (t > 0) & (t <= half)
        gaps = _gap_of(index, x[keep], t[keep])
        hist.update(int(g) for g in gaps)
    skipped = hist.pop(-1, 0)
    worst = max(hist) if hist else 0
    return {
        "depth": sub.depth,
        "max_gap": worst,
        "histogram": {str(k): hist[k] for k in sorted(hist)},
        "pairs": sum(hist.values()) + skipped,
        "skipped": skipped,
        "passed": worst <= LEVEL_GAP_BOUND,
    }


def check_gap_claim(circle: CircleHierarchy) -> dict:
    """Same-level intervals much longer than I stay far from I.

    For every level, every interval I and every i >= 1: an interval I' of
    the same level with |I'| >= 2**(i+1) |I| is at distance >= 2**i |I|.
    For a length threshold 2**-e the binding case is the nearest interval of
    length >= 2**-e on either side, which must be at least 2**-(e+1) away
    from every interval of length <= 2**-(e+2).
    """
    violations = 0
    checked = 0
    for lvl in circle.levels:
        G = lvl.grid
        if G > 62:
            raise NotImplementedError("gap claim check needs a grid of at most 62 bits")
        exps = np.asarray(lvl.exponents, dtype=np.int64)
        starts = np.asarray(lvl.starts, dtype=np.int64)
        ends = starts + np.left_shift(np.int64(1), G - exps)
        period = np.int64(1) << G
        n = len(exps)
        far = np.iinfo(np.int64).max
        for e in np.unique(exps):
            sel = exps >= e + 2
            if not sel.any():
                continue
            mask = exps <= e
            right = _next_true(mask, circle.closed)
            left = _next_true(mask[::-1], circle.closed)[::-1]
            left = np.where(left >= 0, n - 1 - left, -1)
            gap_r = starts[np.maximum(right, 0)] - ends
            gap_l = starts - ends[np.maximum(left, 0)]
            if circle.closed:
                gap_r, gap_l = gap_r % period, gap_l % period
            dist = np.minimum(np.where(right >= 0, gap_r, far), np.where(left >= 0, gap_l, far))
            need = np.int64(1) << (G - int(e) - 1)
            checked += int(sel.sum())
            violations += int(np.sum(sel & (dist < need)))
    return {"checked": checked, "violations": violations, "passed": violations == 0}


def _next_true(mask: np.ndarray, closed: bool) -> np.ndarray:
    """Index of the first True strictly after each position (cyclic if closed), else -1."""
    n = len(mask)
    pos = np.flatnonzero(mask)
    if not len(pos):
        return np.full(n, -1)
    j = np.searchsorted(pos, np.arange(n), side="right")
    out = np.where(j < len(pos), pos[np.minimum(j, len(pos) - 1)], -1)
    if closed:
        out = np.where(out < 0, pos[0], out)
    return out


# -- weak quasisymmetry ---------------------------------------------------------------


def _triples(index: IntervalIndex, rng, count: int):
    """Circle points x, y, z (ticks) with lambda(x, y) <= lambda(x, z) and z beyond the guard."""
    period = index.period
    half = period // 2 if index.closed else period
    x = rng.integers(0, period, count)
    snap = rng.random(count) < 0.5
    starts = index.levels[rng.integers(0, len(index.levels))][0]
    x = np.where(snap, starts[rng.integers(0, len(starts), count)], x)
    rz = np.exp(rng.uniform(np.log(index.guard), np.log(half), count)).astype(np.int64)
    ry = (rz * rng.random(count)).astype(np.int64)
    sy = rng.choice([-1, 1], count)
    sz = rng.choice([-1, 1], count)
    y, z = x + sy * ry, x + sz * rz
    if index.closed:
        return x, y % period, z % period, np.ones(count, dtype=bool)
    ok = (y >= 0) & (y <= period) & (z >= 0) & (z <= period)
    return x, np.clip(y, 0, period), np.clip(z, 0, period), ok


def measure_weak_qs(p: Parametrization, samples: int = 10_000, seed: int = 0, metric: str = "dd",
                    index: IntervalIndex | None = None) -> dict:
    """Empirical weak-quasisymmetry constant of the parametrization.

    ``H_emp`` is the largest |f(x) - f(y)| / |f(x) - f(z)| over sampled
    triples with lambda(x, y) <= lambda(x, z), in the diameter distance
    (``metric="dd"``) or the curve's own metric (``"original"``).  ``H_sym``
    compares the image diameters of the two halves [x - t, x], [x, x + t].
    """
    if metric not in ("dd", "original"):
        raise ValueError(f"metric must be 'dd' or 'original', got {metric!r}")
    curve = p.curve
    index = index or IntervalIndex(p.circle)
    dist = curve.dd if metric == "dd" else curve.distance
    floor = EXACT_TOL * curve.diameter

    def run(rng, count):
        x, y, z, ok = _triples(index, rng, count)
        fx, fy, fz = (p.image_params_on_grid(v, index.grid) for v in (x, y, z))
        worst, arg, used, degenerate = 0.0, None, 0, 0
        for i in np.flatnonzero(ok):
            den = dist(fx[i], fz[i])
            if den <= floor:
                degenerate += 1
                continue
            r = dist(fx[i], fy[i]) / den
            used += 1
            if r > worst:
                worst, arg = r, (int(x[i]), int(y[i]), int(z[i]))
        # symmetric form on the halves around x
        t = np.exp(rng.uniform(np.log(index.guard), np.log(index.period // 2), count)).astype(np.int64)
        lo, hi = x - t, x + t
        keep = np.ones(count, dtype=bool) if index.closed else (lo >= 0) & (hi <= index.period)
        f_lo = p.image_params_on_grid(lo % index.period if index.closed else np.clip(lo, 0, None), index.grid)
        f_hi = p.image_params_on_grid(hi % index.period if index.closed else np.clip(hi, None, index.period), index.grid)
        sym = 0.0
        for i in np.flatnonzero(keep):
            d_left = _image_diameter(curve, f_lo[i], fx[i])
            d_right = _image_diameter(curve, fx[i], f_hi[i])
            if min(d_left, d_right) <= floor:
                continue
            sym = max(sym, d_left / d_right, d_right / d_left)
        return {"H": worst, "arg": arg, "used": used, "degenerate": degenerate, "sym": sym}

    parts = _chunked(samples, seed, 3 if metric == "dd" else 4, run)
    best = max(parts, key=lambda d: d["H"])
    H = best["H"]
    out = {
        "metric": metric,
        "H_emp": H,
        "H_sym": max(d["sym"] for d in parts),
        "argmax_ticks": best["arg"],
        "grid": index.grid,
        "samples": samples,
        "used": sum(d["used"] for d in parts),
        "degenerate": sum(d["degenerate"] for d in parts),
        "H_bound": H_BOUND,
    }
    out["passed"] = H <= H_BOUND if metric == "dd" else True
    return out


def _image_diameter(curve: JordanCurve, a: float, b: float) -> float:
    """Diameter of the image arc running positively from parameter a to b."""
    if curve.closed and b < a:
        b += 1.0
    return curve.span_diameter(a, b)


def check_bt_from_wqs(H: float, C_measured: float, tol: float = 1e-6) -> dict:
    """An H-weak-quasisymmetric image of the circle is min(2H, H^2)-bounded turning."""
    if not H >= 1.0:
        raise BadConstant(f"a weak-quasisymmetry constant is at least 1, got {H}")
    implied = min(2.0 * H, H * H)
    return {"H": H, "implied_C": implied, "C_measured": C_measured, "passed": C_measured <= implied + tol}


# -- metric layer ---------------------------------------------------------------------


def check_dd_metric(curve: JordanCurve, samples: int = 10_000, subarcs: int = 1_000,
                    seed: int = 0, tol: float = EXACT_TOL) -> dict:
    """Metric axioms of the diameter distance and equality of arc diameters.

    Triangle inequality and domination of the original distance are checked
    on sampled triples; subarc diameters are recomputed as the largest
    diameter distance between the subarc's vertices and endpoints.
    """
    scale = curve.diameter
    hi = 1.0

    def run(rng, count):
        u = rng.uniform(0.0, hi, (count, 3))
        worst_tri, worst_dom, asym = 0.0, 0.0, 0
        for a, b, c in u:
            ab, ac, cb = curve.dd(a, b), curve.dd(a, c), curve.dd(c, b)
            worst_tri = max(worst_tri, (ab - ac - cb) / scale)
            worst_dom = max(worst_dom, (curve.distance(a, b) - ab) / scale)
            asym += curve.dd(b, a) != ab
        return worst_tri, worst_dom, asym

    parts = _chunked(samples, seed, 5, run)
    tri = max(p[0] for p in parts)
    dom = max(p[1] for p in parts)
    asym = sum(p[2] for p in parts)

    rng = np.random.default_rng(np.random.SeedSequence([seed, 6]))
    worst_diam = 0.0
    for _ in range(subarcs):
        u0 = rng.uniform(0.0, 1.0)
        u1 = u0 + rng.uniform(0.0, 1.0) if curve.closed else rng.uniform(u0, 1.0)
        d = curve.span_diameter(u0, u1)
        if d <= 0.0:
            continue
        worst_diam = max(worst_diam, abs(_dd_diameter(curve, u0, u1) - d) / d)
    out = {
        "max_triangle_excess": tri,
        "max_domination_excess": dom,
        "asymmetric_pairs": int(asym),
        "max_diameter_mismatch": worst_diam,
        "samples": samples,
        "subarcs": subarcs,
    }
    out["triangle_passed"] = tri <= tol and dom <= tol and asym == 0
    out["diameter_passed"] = worst_diam <= tol
    return out


def _dd_diameter(curve: JordanCurve, u0: float, u1: float) -> float:
    """Largest diameter distance between vertices and endpoints of [u0, u1]."""
    p = curve._ext_param
    a = int(np.searchsorted(p, u0, side="right"))
    b = int(np.searchsorted(p, u1, side="left")) - 1
    b = min(b, a + curve.n - 1)
    best = curve.dd(u0, u1 - 1.0 if u1 > 1.0 else u1) if u1 - u0 < 1.0 else 0.0
    if b >= a:
        V = curve._ext_vertex[a : b + 1]
        best = max(best, float(curve.dd_matrix[np.ix_(V, V)].max()))
        best = max(best, float(curve.dd_to_vertices(u0)[V].max()))
        best = max(best, float(curve.dd_to_vertices(u1 - 1.0 if u1 > 1.0 else u1)[V].max()))
    return best


# -- hierarchy invariants ---------------------------------------------------------------


def check_gamma_hierarchy(gamma: GammaHierarchy, tol: float = DEFAULT_TOL) -> dict:
    """Tiling, nesting, diameter ratios and child counts of the curve subdivision."""
    diam = gamma.curve.diameter
    problems: list[str] = []
    same_level = []
    cross = []
    for n in range(1, gamma.depth + 1):
        lvl = gamma.level(n)
        pos = lvl.positions
        if pos[0] != 0.0 or pos[-1] != 1.0 or np.any(np.diff(pos) <= 0):
            problems.append(f"level {n} does not tile the curve")
        d = lvl.diameters
        same_level.append(float(d.max() / d.min()))
        if n == 1:
            if d.min() < diam / 8 * (1 - tol) or d.max() > diam / 4 * (1 + tol):
                problems.append("level 1 diameters outside [diam/8, diam/4]")
            continue
        up = gamma.level(n - 1)
        if np.any(np.diff(lvl.parents) < 0):
            problems.append(f"level {n} children out of order")
        counts = np.bincount(lvl.parents, minlength=up.count)
        if counts.min() < 4:
            problems.append(f"level {n - 1} has an arc with {counts.min()} children")
        first = np.concatenate([[0], np.cumsum(counts)[:-1]])
        if not np.array_equal(pos[first], up.positions[:-1]):
            problems.append(f"level {n} does not nest in level {n - 1}")
        cross.append((float(d.min() / up.diameters.max()), float(d.max() / up.diameters.min())))
    worst_same = max(same_level)
    if worst_same > 2.0 + tol:
        problems.append(f"same-level diameter ratio {worst_same:.6g} > 2")
    lo = min((c[0] for c in cross), default=1 / 16)
    hi = max((c[1] for c in cross), default=1 / 4)
    if lo < 1 / 16 - tol:
        problems.append(f"child/parent ratio {lo:.6g} < 1/16")
    if hi > 1 / 4 + tol:
        problems.append(f"child/parent ratio {hi:.6g} > 1/4")
    return {
        "counts": [gamma.level(n).count for n in range(1, gamma.depth + 1)],
        "max_same_level_ratio": worst_same,
        "min_child_parent_ratio": lo,
        "max_child_parent_ratio": hi,
        "level1_relative": [float(gamma.level(1).diameters.min() / diam),
                            float(gamma.level(1).diameters.max() / diam)],
        "problems": problems,
        "passed": not problems,
    }


def check_circle_hierarchy(circle: CircleHierarchy) -> dict:
    """Exact tiling, neighbour ratios, child sizes and nesting of the circle subdivision."""
    problems: list[str] = []
    for n, lvl in enumerate(circle.levels, start=1):
        exps = np.asarray(lvl.exponents, dtype=np.int64)
        starts = [int(s) for s in lvl.starts]
        lengths = [1 << (lvl.grid - int(k)) for k in exps]
        if starts[0] != 0 or starts[-1] + lengths[-1] != 1 << lvl.grid:
            problems.append(f"level {n} does not tile [0, 1]")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            problems.append(f"level {n} breakpoints not increasing")
        if any(s + w != t for s, w, t in zip(starts, lengths, starts[1:])):
            problems.append(f"level {n} has gaps or overlaps")
        diff = np.abs(np.diff(exps))
        if diff.size and diff.max() > 1:
            problems.append(f"level {n} neighbours differ by more than a factor 2")
        if circle.closed and abs(int(exps[0]) - int(exps[-1])) > 1:
            problems.append(f"level {n} wrap-around neighbours differ by more than a factor 2")
        if n == 1:
            parent_exps = np.zeros(1, dtype=np.int64)
            parent_starts, parent_grid = [0], 0
        else:
            up = circle.level(n - 1)
            parent_exps = np.asarray(up.exponents, dtype=np.int64)
            parent_starts, parent_grid = [int(s) for s in up.starts], up.grid
        par = np.asarray(lvl.parents)
        if np.any(exps < parent_exps[par] + 2):
            problems.append(f"level {n} has a child longer than a quarter of its parent")
        shift = lvl.grid - parent_grid
        for j, i in enumerate(par):
            p0 = parent_starts[i] << shift
            p1 = p0 + (1 << (lvl.grid - int(parent_exps[i])))
            if not (p0 <= starts[j] and starts[j] + lengths[j] <= p1):
                problems.append(f"level {n} interval {j} leaves its parent")
                break
            if lvl.middle[j]:
                mid = p0 + (p1 - p0) // 2
                if not (starts[j] <= mid <= starts[j] + lengths[j]):
                    problems.append(f"level {n} interval {j} flagged middle but misses the midpoint")
                    break
    return {"depth": circle.depth, "problems": problems, "passed": not problems}


def check_combinatorics(gamma: GammaHierarchy, circle: CircleHierarchy) -> dict:
    """Index-for-index agreement of the parent maps of both subdivisions."""
    same = gamma.depth == circle.depth and all(
        gamma.level(n).count == circle.level(n).count
        and np.array_equal(gamma.level(n).parents, circle.level(n).parents)
        for n in range(1, gamma.depth + 1)
    )
    return {"passed": bool(same)}


def check_dyadic_patterns(max_children: int = 64) -> dict:
    """Child length patterns for 4 <= N <= max_children: exact sum, maximum and minimum."""
    from .subdivision import dyadic_child_lengths

    bad = []
    for N in range(4, max_children + 1):
        lengths = dyadic_child_lengths(N)
        total = sum(lengths, Dyadic(0))
        floor = Dyadic.pow2(-(-(N + 1) // 2))
        if len(lengths) != N or total != 1 or max(lengths) != Dyadic.pow2(2) or min(lengths) < floor:
            bad.append(N)
    return {"max_children": max_children, "failures": bad, "passed": not bad}


def check_parametrization(p: Parametrization) -> dict:
    """Breakpoint map: well defined across levels, injective, order preserving, dense."""
    problems: list[str] = []
    deep_ticks = [int(t) for t in p.breakpoint_ticks]
    where = {t: i for i, t in enumerate(deep_ticks)}
    images = p.breakpoint_images
    for n in range(1, p.depth + 1):
        lvl = p.circle.level(n)
        shift = p.grid - lvl.grid
        arcs = p.gamma.level(n).positions
        for j, s in enumerate(lvl.starts):
            k = where.get(int(s) << shift)
            if k is None or images[k] != arcs[j]:
                problems.append(f"breakpoint {j} of level {n} maps inconsistently")
                break
    if images[0] != 0.0:
        problems.append("0 does not map to the basepoint")
    if np.any(np.diff(images) <= 0):
        problems.append("breakpoint images are not strictly increasing along the curve")
    # every vertex lies within one deepest arc diameter of a breakpoint image
    deep = p.gamma.levels[-1]
    arc_of = np.clip(np.searchsorted(deep.positions, p.curve.param, side="right") - 1, 0, deep.count - 1)
    worst = 0.0
    for u, j in zip(p.curve.param, arc_of):
        d = min(p.dd(u, deep.positions[j]), p.dd(u, deep.positions[j + 1]))
        worst = max(worst, d / deep.diameters[j])
    if worst > 1.0 + p.gamma.tol:
        problems.append("a vertex is farther than one arc diameter from every breakpoint image")
    dense_bound = 0.25 ** (p.depth - 1) * p.curve.diameter
    max_arc = float(deep.diameters.max())
    if max_arc > dense_bound * (1 + p.gamma.tol):
        problems.append("deepest arcs exceed the (1/4)^(depth-1) diameter bound")
    return {
        "breakpoints": len(images) - 1,
        "max_vertex_gap_over_arc": worst,
        "max_deep_arc_diameter": max_arc,
        "density_bound": dense_bound,
        "problems": problems,
        "passed": not problems,
    }


# -- certification ------------------------------------------------------------------------


@dataclass
class CertificationReport:
    C_original: float
    C_dd: float
    max_interval_ratio: float
    max_level_gap: int
    H_emp_dd: float
    H_emp_original: float
    H_sym_dd: float
    H_bound: int
    pass_flags: dict
    samples: int
    seed: int
    depth: int
    curve: dict
    checks: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    timestamp: str | None = None
    runtime_s: float | None = None

    @property
    def passed(self) -> bool:
        return all(self.pass_flags.values())

    @property
    def failing(self) -> list[str]:
        return [k for k, v in self.pass_flags.items() if not v]

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CertificationReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "CertificationReport":
        return cls.from_dict(json.loads(text))


def _plain(obj):
    """Convert numpy scalars and containers to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Dyadic):
        return str(obj)
    return obj


def certify(curve: JordanCurve, depth: int = 4, samples: int = 10_000, seed: int = 0,
            tol: float = DEFAULT_TOL, timestamp: bool = True) -> CertificationReport:
    """Full pipeline: constants, subdivisions, parametrization and every check.

    A failing or crashing check clears its flag and is recorded in
    ``errors``; the remaining checks still run.
    """
    t0 = time.perf_counter()
    checks: dict = {}
    flags: dict = {}
    errors: list = []

    def run(name, fn, *flag_keys):
        try:
            result = fn()
        except Exception as exc:  # noqa: BLE001 - reported, not swallowed
            errors.append({"check": name, "error": type(exc).__name__, "message": str(exc)})
            for key in flag_keys or (name,):
                flags[key] = False
            return None
        checks[name] = result
        return result

    C_orig = run("C_original", lambda: bounded_turning_constant(curve, seed=seed)) or float("nan")
    C_dd = run("C_dd", lambda: bounded_turning_constant(remetrize_dd(curve), seed=seed)) or float("nan")
    flags["remetrized_bt"] = bool(1.0 <= C_dd <= 1.0 + 1e-6)

    metric = run("metric", lambda: check_dd_metric(curve, samples, max(1, samples // 10), seed),
                 "metric_triangle", "diameter_identity")
    if metric:
        flags["metric_triangle"] = metric["triangle_passed"]
        flags["diameter_identity"] = metric["diameter_passed"]

    p = run("build", lambda: build_parametrization(curve, depth, tol), "build")
    max_ratio, max_gap = float("nan"), -1
    H_dd = H_orig = H_sym = float("nan")
    if p is not None:
        flags["build"] = True
        checks["build"] = {"level_counts": [p.circle.level(n).count for n in range(1, p.depth + 1)],
                           "grid": p.grid}
        index = IntervalIndex(p.circle)
        for name, fn in [
            ("gamma_hierarchy", lambda: check_gamma_hierarchy(p.gamma, tol)),
            ("circle_hierarchy", lambda: check_circle_hierarchy(p.circle)),
            ("combinatorics", lambda: check_combinatorics(p.gamma, p.circle)),
            ("dyadic_patterns", lambda: check_dyadic_patterns()),
            ("parametrization", lambda: check_parametrization(p)),
            ("gap_claim", lambda: check_gap_claim(p.circle)),
            ("level_gap_exhaustive", lambda: level_gap_exhaustive(p.circle)),
        ]:
            res = run(name, fn)
            if res is not None:
                flags[name] = bool(res["passed"])
        for n in range(1, min(2, depth) + 1):
            res = run(f"modulus_{n}", lambda n=n: modulus_check(p, n, samples, seed))
            if res is not None:
                flags[f"modulus_{n}"] = bool(res["passed"])
        res = run("interval_estimate", lambda: check_interval_estimate(p.circle, samples, seed, index))
        if res is not None:
            flags["interval_estimate"] = bool(res["passed"])
            max_ratio = res["max_ratio"]
        res = run("level_gap", lambda: check_level_gap(p.circle, samples, seed, index))
        if res is not None:
            flags["level_gap"] = bool(res["passed"])
            max_gap = res["max_gap"]
        res = run("weak_qs_dd", lambda: measure_weak_qs(p, samples, seed, "dd", index))
        if res is not None:
            H_dd, H_sym = res["H_emp"], res["H_sym"]
            flags["weak_qs_bound"] = bool(res["passed"])
        res = run("weak_qs_original", lambda: measure_weak_qs(p, samples, seed, "original", index))
        if res is not None:
            H_orig = res["H_emp"]
            flags["weak_qs_original"] = bool(H_orig <= H_BOUND * C_orig**2)
        res = run("bt_consistency", lambda: check_bt_from_wqs(max(H_dd, 1.0), C_dd))
        if res is not None:
            flags["bt_consistency"] = bool(res["passed"])
        res = run("bt_consistency_original", lambda: check_bt_from_wqs(max(H_orig, 1.0), C_orig))
        if res is not None:
            flags["bt_consistency_original"] = bool(res["passed"])

    report = CertificationReport(
        C_original=C_orig,
        C_dd=C_dd,
        max_interval_ratio=max_ratio,
        max_level_gap=int(max_gap),
        H_emp_dd=H_dd,
        H_emp_original=H_orig,
        H_sym_dd=H_sym,
        H_bound=H_BOUND,
        pass_flags=flags,
        samples=samples,
        seed=seed,
        depth=depth,
        curve={"vertices": curve.n, "closed": curve.closed, "backend": curve.backend,
               "diameter": curve.diameter},
        checks=_plain(checks),
        errors=errors,
    )
    if timestamp:
        report.timestamp = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        report.runtime_s = round(time.perf_counter() - t0, 3)
    return report
