"""Critical-value curves, cusps, and the unfolded bifurcation diagram.

Critical points of ``Hbar_t`` on ``M_j`` lie on the meridian great circle
``phi in {0, pi}`` parametrized by ``sigma``.  The set ``{f'(j, sigma) = 0}``
is a smooth curve in the ``(j, sigma)`` plane away from degenerate points;
tracing it by marching squares (instead of continuing roots in ``j``) makes
fold points of that curve, which are the cusps of the critical-value curve,
ordinary interior samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import root
from skimage import measure

from .ambient import TLike, _t
from .polygon import make_octagon
from .reduced import (
    CriticalType,
    PoleType,
    _classify_meridian,
    classify_pole,
    critical_points_on_slice,
    get_slice,
    level_intervals,
)

VERTEX_J = (1.0, 2.0)
_OCTAGON = make_octagon()


@dataclass
class Cusp:
    param: float
    x: float
    value: float
    d3: float
    flat: bool = False
    index: int = -1          # sample index on the curve just before the cusp


@dataclass
class CriticalValueCurve:
    """Samples ``(param, x, value)`` ordered along one branch of critical points.

    For the reduced Hamiltonian ``param`` is ``j`` and ``x`` is the meridian
    angle ``sigma``.
    """

    param: np.ndarray
    x: np.ndarray
    value: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    kinds: list
    closed: bool = False
    cusps: list = field(default_factory=list)

    def __len__(self):
        return len(self.param)

    @property
    def h(self) -> np.ndarray | None:
        return getattr(self, "_h", None)

    def to_rows(self, curve_id: int) -> list[tuple]:
        return [(curve_id, float(p), float(x), float(v), k.value if hasattr(k, "value") else str(k))
                for p, x, v, k in zip(self.param, self.x, self.value, self.kinds)]


# -- generic curve tracing ------------------------------------------------------

DerivFn = Callable[[float, np.ndarray], np.ndarray]


def trace_critical_curves(deriv: DerivFn, params: np.ndarray, n_x: int,
                          x_range=(0.0, 2 * math.pi), periodic: bool = True,
                          classify: Callable | None = None) -> list[CriticalValueCurve]:
    """Zero set of ``f'`` in the ``(param, x)`` plane, as ordered curves.

    Parameters
    ----------
    deriv : callable
        ``deriv(p, x)`` returns the stack ``[f, f', f'', f''']`` at the
        points ``x`` for parameter ``p``.
    params : array
        Increasing parameter samples (rows of the grid).
    n_x : int
        Number of ``x`` samples.  The grid is offset by half a cell so that
        ``x_range[0]`` is never a sample (symmetric zeros there are found by
        interpolation).
    classify : callable, optional
        ``classify(p, x, d2) -> tag`` for each curve sample.
    """
    params = np.asarray(params, float)
    lo, hi = x_range
    dx = (hi - lo) / n_x
    xs = lo + (np.arange(n_x) + 0.5) * dx
    F = np.stack([deriv(p, xs)[1] for p in params])
    if periodic:
        F = np.concatenate([F, F[:, :1]], axis=1)
    curves = []
    for cont in measure.find_contours(F, 0.0):
        rows, cols = cont[:, 0], cont[:, 1]
        p = np.interp(rows, np.arange(len(params)), params)
        x = lo + (cols + 0.5) * dx
        if periodic:
            x = np.mod(x - lo, hi - lo) + lo
        # project samples onto the zero set along x (skip near folds)
        x = x.copy()
        vals = np.empty((4, len(p)))
        for k in range(len(p)):
            d = deriv(p[k], np.array([x[k]]))[:, 0]
            if abs(d[2]) > 1e-8 and abs(d[1] / d[2]) < 0.5 * dx:
                x[k] -= d[1] / d[2]
                d = deriv(p[k], np.array([x[k]]))[:, 0]
            vals[:, k] = d
        kinds = [classify(pp, xx, d2) if classify else None for pp, xx, d2 in zip(p, x, vals[2])]
        closed = len(cont) > 2 and np.allclose(cont[0], cont[-1])
        curves.append(CriticalValueCurve(p, x, vals[0], vals[2], vals[3], kinds, closed))
    return curves


def detect_cusps(curve: CriticalValueCurve, deriv: DerivFn | None = None,
                 d3_tol: float = 1e-6) -> list[Cusp]:
    """Fold points of the critical set: ``f''`` changes sign along the curve.

    With ``deriv`` the location is refined by solving ``f' = f'' = 0``.  A
    third derivative below ``d3_tol`` marks the point as a flat degeneracy.
    """
    if len(curve) < 5:
        raise ValueError("need at least 5 samples to detect cusps")
    out = []
    s = np.sign(curve.d2)
    for k in range(len(curve) - 1):
        if s[k] == 0 or s[k] * s[k + 1] >= 0:
            continue
        w = curve.d2[k] / (curve.d2[k] - curve.d2[k + 1])
        p = curve.param[k] + w * (curve.param[k + 1] - curve.param[k])
        x = curve.x[k] + w * _wrap_diff(curve.x[k + 1], curve.x[k])
        if deriv is not None:
            sol = root(lambda v: deriv(v[0], np.array([v[1]]))[1:3, 0], [p, x], method="hybr",
                       options={"xtol": 1e-13})
            # near a fold consecutive samples move along x, so the window uses the full step
            step = math.hypot(curve.param[k + 1] - curve.param[k], _wrap_diff(curve.x[k + 1], curve.x[k]))
            if sol.success and math.hypot(sol.x[0] - p, sol.x[1] - x) < 4 * step + 1e-9:
                p, x = float(sol.x[0]), float(sol.x[1])
            d = deriv(p, np.array([x]))[:, 0]
            val, d3 = float(d[0]), float(d[3])
        else:
            val = curve.value[k] + w * (curve.value[k + 1] - curve.value[k])
            d3 = curve.d3[k] + w * (curve.d3[k + 1] - curve.d3[k])
        out.append(Cusp(float(p), float(x), val, d3, abs(d3) < d3_tol, k))
    curve.cusps = out
    return out


def _wrap_diff(a, b):
    d = a - b
    if abs(d) > math.pi:
        d -= math.copysign(2 * math.pi, d)
    return d


def quartic_model(s: float, x: np.ndarray) -> np.ndarray:
    """``f = x^4/4 - x^2/2 + s x``: a fold of ``f' = 0`` at ``s = 2 / (3 sqrt 3)``."""
    x = np.asarray(x, float)
    return np.stack([x ** 4 / 4 - x ** 2 / 2 + s * x, x ** 3 - x + s, 3 * x ** 2 - 1, 6 * x])


QUARTIC_CUSP = 2.0 / (3.0 * math.sqrt(3.0))


# -- reduced Hamiltonian curves ---------------------------------------------------

def _j_segments(j_grid) -> list[np.ndarray]:
    j = np.asarray(sorted(set(float(v) for v in j_grid)))
    if j.size and (j.min() <= 0.0 or j.max() >= 3.0):
        raise ValueError("j_grid must lie in (0, 3)")
    bounds = [0.0, *VERTEX_J, 3.0]
    segs = []
    for a, b in zip(bounds, bounds[1:]):
        seg = j[(j > a) & (j < b)]
        if len(seg) >= 2:
            segs.append(seg)
    return segs


def meridian_deriv(t: TLike) -> DerivFn:
    t = tuple(map(float, _t(t)))

    def deriv(j, sigma):
        return get_slice(t, j).meridian(np.asarray(sigma, float), 3)
    return deriv


def _meridian_kind(t, degenerate_tol=1e-9):
    def kind(j, sigma, d2):
        sl = get_slice(t, j)
        if abs(math.sin(sigma)) < 1e-9:
            # on the axis the value is rotationally symmetric to second order
            return CriticalType.DEGENERATE if abs(d2) <= degenerate_tol * sl.value_scale else CriticalType.ELLIPTIC_REGULAR
        trans = float(sl.transverse(sigma))
        tn = sl.B * math.sqrt(max(float(sl.R(math.cos(sigma))), 0.0))
        return _classify_meridian(d2, trans, tn, degenerate_tol * sl.value_scale)
    return kind


@dataclass
class CriticalDiagram:
    t: np.ndarray
    curves: list
    distinguished: list        # (j, value, PoleType) at vertex slices
    diagnostics: list = field(default_factory=list)

    def all_cusps(self) -> list[Cusp]:
        return [c for cv in self.curves for c in cv.cusps]

    def points(self) -> np.ndarray:
        """All curve samples as ``(j, value)`` rows."""
        if not self.curves:
            return np.empty((0, 2))
        return np.concatenate([np.column_stack([cv.param, cv.value]) for cv in self.curves])


def critical_value_curves(t: TLike, j_grid=None, n_sigma: int = 512, d3_tol: float = 1e-6) -> CriticalDiagram:
    """Critical values of ``Hbar_t`` over ``j``, traced as curves with cusp markers."""
    t = tuple(map(float, _t(t)))
    if j_grid is None:
        j_grid = (np.arange(512) + 0.5) * 3.0 / 512
    deriv = meridian_deriv(t)
    kind = _meridian_kind(t)
    zero_t1 = t[0] == 0.0
    curves = []
    for seg in _j_segments(j_grid):
        for cv in trace_critical_curves(deriv, seg, n_sigma, classify=kind):
            if zero_t1 and np.any(np.sin(cv.x) < -1e-9):
                continue   # circles of critical points are traced twice when t1 = 0
            sl_h = np.array([float(get_slice(t, p).to_hphi(x)[0]) for p, x in zip(cv.param, cv.x)])
            cv._h = sl_h
            if len(cv) >= 5:
                detect_cusps(cv, deriv, d3_tol)
            curves.append(cv)
    dist = []
    for jv in VERTEX_J:
        sl = get_slice(t, jv)
        for which in ("lower", "upper"):
            if sl.pole_is_fixed(which):
                dist.append((jv, sl.pole_value(which), classify_pole(t, jv, which)))
    return CriticalDiagram(np.asarray(t), curves, dist)


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


def find_swallowtails(curve: CriticalValueCurve) -> list[tuple[Cusp, Cusp, tuple]]:
    """Consecutive cusp pairs whose outer branches cross in the ``(j, value)`` plane."""
    out = []
    cusps = [c for c in curve.cusps if not c.flat]
    P = np.stack([curve.param, curve.value], axis=1)
    for c1, c2 in zip(cusps, cusps[1:]):
        a, b = c1.index, c2.index
        left = P[max(0, a - 400): a + 1]
        right = P[b + 1: b + 401]
        hit = _first_crossing(left, right)
        if hit is not None:
            out.append((c1, c2, hit))
    return out


def _first_crossing(A, B):
    for i in range(len(A) - 1):
        amin, amax = np.minimum(A[i], A[i + 1]), np.maximum(A[i], A[i + 1])
        for k in range(len(B) - 1):
            bmin, bmax = np.minimum(B[k], B[k + 1]), np.maximum(B[k], B[k + 1])
            if np.any(amax < bmin) or np.any(bmax < amin):
                continue
            if _segments_cross(A[i], A[i + 1], B[k], B[k + 1]):
                return (float(0.5 * (A[i][0] + A[i + 1][0])), float(0.5 * (A[i][1] + A[i + 1][1])))
    return None


# -- unfolded diagram -------------------------------------------------------------

@dataclass
class UnfoldedDiagram:
    """Sheets of the leaf space over a ``(j, c)`` grid.

    ``cells[i][k]`` lists ``(layer_id, z_lo, z_hi)`` for every leaf over the
    cell centre ``(j[i], c[k])``.
    """

    t: np.ndarray
    j: np.ndarray
    c: np.ndarray
    cells: list
    n_layers: int
    layer_sizes: dict
    features: list
    critical: CriticalDiagram | None = None

    def count_grid(self) -> np.ndarray:
        return np.array([[len(cell) for cell in row] for row in self.cells])

    def cell_of(self, r):
        i = int(np.argmin(np.abs(self.j - r[0])))
        k = int(np.argmin(np.abs(self.c - r[1])))
        return i, k

    def tau_preimage(self, r) -> list:
        """Layer ids over ``r``, one per leaf of ``F_t^{-1}(r)``.

        Leaves at ``r`` are computed exactly and each is assigned the sheet of
        the closest leaf (in Z) among the nearest cell and its neighbours;
        ``-1`` marks a leaf with no sheet nearby.
        """
        j, c = float(r[0]), float(r[1])
        if not 0.0 < j < 3.0:
            return []
        leaves = level_intervals(self.t, j, c)
        i0, k0 = self.cell_of(r)
        near = [(abs(i - i0) + abs(k - k0), leaf)
                for i in range(max(i0 - 1, 0), min(i0 + 2, len(self.j)))
                for k in range(max(k0 - 1, 0), min(k0 + 2, len(self.c)))
                for leaf in self.cells[i][k]]
        out = []
        for lf in leaves:
            if not near:
                out.append(-1)
                continue
            _, best = min(near, key=lambda e: (abs(lf.z_lo - e[1][1]) + abs(lf.z_hi - e[1][2]), e[0]))
            out.append(best[0])
        return out

    def multiplicity(self, r) -> int:
        return len(self.tau_preimage(r))

    def main_layer(self) -> int:
        return max(self.layer_sizes, key=self.layer_sizes.get) if self.layer_sizes else -1


def image_bounds(t: TLike, n_j: int = 128) -> tuple[float, float]:
    """Range of ``Hbar_t`` over ``M`` from slice extrema."""
    lo, hi = math.inf, -math.inf
    for j in (np.arange(n_j) + 0.5) * 3.0 / n_j:
        sl = get_slice(t, j)
        f = sl.meridian(np.linspace(0, 2 * math.pi, 1025))[0]
        lo, hi = min(lo, float(f.min())), max(hi, float(f.max()))
    return lo, hi


def unfolded_diagram(t: TLike, grid=(128, 128), c_range=None, with_curves: bool = True) -> UnfoldedDiagram:
    """Leaf counts on a ``(j, c)`` grid, glued into sheets by continuity of leaves.

    Between neighbouring cells with no critical value in between, leaves
    continue one-to-one and keep their order in Z, so they are glued by
    order.  When critical values lie in between, the leaves born or dying at
    an elliptic value, and the leaves meeting at a saddle, are left unglued:
    the leaf space branches along saddle curves, and a sheet bounded by such
    a branch curve and an elliptic curve is a flap.
    """
    t = tuple(map(float, _t(t)))
    n_j, n_c = grid
    j = (np.arange(n_j) + 0.5) * 3.0 / n_j
    if c_range is None:
        lo, hi = image_bounds(t)
        pad = 0.02 * max(hi - lo, 1e-9)
        c_range = (lo - pad, hi + pad)
    c = c_range[0] + (np.arange(n_c) + 0.5) * (c_range[1] - c_range[0]) / n_c
    leaves, crits = [], []
    for jv in j:
        crit = critical_points_on_slice(t, jv)
        crits.append([(p.z, p.value, p.is_saddle) for p in sorted(crit, key=lambda p: p.sigma)])
        leaves.append([[(lf.z_lo, lf.z_hi) for lf in level_intervals(t, jv, cv, critical=crit)]
                       for cv in c])
    # union-find over (i, k, q)
    index = {}
    for i in range(n_j):
        for k in range(n_c):
            for q in range(len(leaves[i][k])):
                index[(i, k, q)] = len(index)
    parent = list(range(len(index)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def link(A, B, ia, ib, crossed):
        if not A or not B:
            return
        if len(A) == len(B) == 1:
            # a crossing on the sphere always changes the leaf count
            crossed = []
        skip_a, skip_b = set(), set()
        for z, saddle in crossed:
            skip_a |= _involved(A, z, saddle)
            skip_b |= _involved(B, z, saddle)
        qa = [q for q in range(len(A)) if q not in skip_a]
        qb = [q for q in range(len(B)) if q not in skip_b]
        if len(qa) == len(qb):
            matches = zip(qa, qb)
        else:
            matches = _mutual_nearest(A, B, qa, qb)
        for q, p in matches:
            x, y = find(index[ia + (q,)]), find(index[ib + (p,)])
            if x != y:
                parent[x] = y

    pairs = [_pair_critical(crits[i], crits[i + 1]) for i in range(n_j - 1)]
    births = [_unpaired(crits[i], crits[i + 1], pairs[i]) for i in range(n_j - 1)]
    for i in range(n_j):
        for k in range(n_c):
            if k + 1 < n_c:
                crossed = [(z, sd) for z, v, sd in crits[i] if c[k] < v <= c[k + 1]]
                link(leaves[i][k], leaves[i][k + 1], (i, k), (i, k + 1), crossed)
            if i + 1 < n_j:
                crossed = []
                for (z, v, sd), (z2, v2, _) in pairs[i]:
                    if (v - c[k]) * (v2 - c[k]) <= 0:
                        crossed += [(z, sd), (z2, sd)]
                for z, sd, lo_v, hi_v in births[i]:
                    if lo_v <= c[k] <= hi_v:
                        crossed.append((z, sd))
                link(leaves[i][k], leaves[i + 1][k], (i, k), (i + 1, k), crossed)
    roots: dict[int, int] = {}
    sizes: dict[int, int] = {}
    cells = []
    for i in range(n_j):
        row = []
        for k in range(n_c):
            cell = []
            for q, (a, b) in enumerate(leaves[i][k]):
                r = find(index[(i, k, q)])
                lid = roots.setdefault(r, len(roots))
                sizes[lid] = sizes.get(lid, 0) + 1
                cell.append((lid, a, b))
            row.append(cell)
        cells.append(row)
    diag = UnfoldedDiagram(np.asarray(t), j, c, cells, len(roots), sizes, [])
    if with_curves:
        diag.critical = critical_value_curves(t, np.linspace(1e-3, 3 - 1e-3, max(2 * n_j, 256)))
    diag.features = find_features(diag)
    return diag


def _involved(leaves, z, saddle: bool, ztol: float = 1e-9) -> set:
    """Leaves changing at a critical point at ``z``.

    For a saddle: the leaf through it, or the two leaves on either side.
    For an extremum: the leaf around it, if any.
    """
    inside = {q for q, (a, b) in enumerate(leaves) if a - ztol <= z <= b + ztol}
    if inside or not saddle:
        return inside
    below = [(b, q) for q, (a, b) in enumerate(leaves) if b < z]
    above = [(a, q) for q, (a, b) in enumerate(leaves) if a > z]
    out = set()
    if below:
        out.add(max(below)[1])
    if above:
        out.add(min(above)[1])
    return out


def _mutual_nearest(A, B, qa, qb) -> list:
    if not qa or not qb:
        return []
    D = np.array([[abs(A[q][0] - B[p][0]) + abs(A[q][1] - B[p][1]) for p in qb] for q in qa])
    ab, ba = D.argmin(axis=1), D.argmin(axis=0)
    return [(qa[m], qb[n]) for m, n in enumerate(ab) if ba[n] == m]


def _unpaired(A, B, pairs) -> list:
    """Critical points present on only one of two slices (born or annihilated in pairs).

    Each is returned as ``(z, is_saddle, lo, hi)`` with ``[lo, hi]`` the value
    band between it and its nearest unpaired partner on the same slice.
    """
    used_a = {id(a) for a, _ in pairs}
    used_b = {id(b) for _, b in pairs}
    out = []
    for side, used in ((A, used_a), (B, used_b)):
        free = [p for p in side if id(p) not in used]
        for p in free:
            others = [q for q in free if q is not p]
            if others:
                q = min(others, key=lambda r: abs(r[0] - p[0]))
                out.append((p[0], p[2], min(p[1], q[1]), max(p[1], q[1])))
            else:
                out.append((p[0], p[2], p[1], p[1]))
    return out


def _pair_critical(A, B, z_tol: float = 0.1) -> list:
    """Match critical points ``(z, value, is_saddle)`` of neighbouring slices.

    By order when the counts agree, otherwise by nearest Z among points of the
    same kind.
    """
    if len(A) == len(B) and all(a[2] == b[2] for a, b in zip(A, B)):
        return list(zip(A, B))
    out = []
    for a in A:
        same = [b for b in B if b[2] == a[2]]
        if not same:
            continue
        b = min(same, key=lambda s: abs(s[0] - a[0]))
        if abs(b[0] - a[0]) <= z_tol:
            out.append((a, b))
    return out


def find_features(diag: UnfoldedDiagram, min_cells: int = 4) -> list[dict]:
    """Flaps, swallowtails, cusps and focus-focus markers."""
    feats = []
    main = diag.main_layer()
    counts = diag.count_grid()
    for lid, size in sorted(diag.layer_sizes.items()):
        if lid == main or size < min_cells:
            continue
        cells = [(i, k) for i in range(len(diag.j)) for k in range(len(diag.c))
                 if any(l == lid for l, _, _ in diag.cells[i][k])]
        if not cells:
            continue
        ii = [i for i, _ in cells]
        kk = [k for _, k in cells]
        over = sum(1 for i, k in cells if counts[i, k] >= 2)
        feats.append({"kind": "flap", "layer": int(lid), "cells": int(size),
                      "j_range": [float(diag.j[min(ii)]), float(diag.j[max(ii)])],
                      "c_range": [float(diag.c[min(kk)]), float(diag.c[max(kk)])],
                      "overlap_cells": int(over)})
    if diag.critical is not None:
        for n, cv in enumerate(diag.critical.curves):
            for cp in cv.cusps:
                feats.append({"kind": "cusp", "curve": n, "j": cp.param, "value": cp.value,
                              "flat": bool(cp.flat)})
            for c1, c2, hit in find_swallowtails(cv):
                feats.append({"kind": "swallowtail", "curve": n, "cusps": [[c1.param, c1.value], [c2.param, c2.value]],
                              "crossing": list(hit)})
        for jv, val, kind in diag.critical.distinguished:
            if kind is PoleType.FOCUS_FOCUS:
                feats.append({"kind": "focus-focus", "j": jv, "value": val})
    return feats
