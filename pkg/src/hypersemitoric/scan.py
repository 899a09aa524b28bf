"""Parameter scans: stack-count witnesses, multi-leaf regions, rank-zero localization.

Each ``t`` cell is processed by :func:`scan_cell`, a pure function; cell
results are merged by :func:`merge`, which is associative and commutative
(witnesses are chosen by smallest cell index), so the report does not depend
on worker scheduling.
"""
from __future__ import annotations

import itertools
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq, root

from . import ambient
from .reduced import critical_points_on_slice, level_intervals, morse_count

MAX_STACK = 13
VERTEX_GAP = 0.01         # witnesses closer than this to j in {0, 1, 2, 3} are rejected


def default_j_grid(n: int = 64) -> np.ndarray:
    """Uniform grid in ``(0, 3)`` refined near the vertex slices ``j = 1, 2``."""
    base = (np.arange(n) + 0.5) * 3.0 / n
    fine = []
    for v in (1.0, 2.0):
        fine.append(v + np.linspace(-0.1, -0.002, n // 4))
        fine.append(v + np.linspace(0.002, 0.1, n // 4))
    return np.unique(np.round(np.concatenate([base, *fine]), 12))


def coarse_t_grid(n: int = 5, lo: float = 0.0, hi: float = 1.0) -> list[tuple]:
    axis = np.linspace(lo, hi, n)
    return [tuple(float(v) for v in p) for p in itertools.product(axis, repeat=4)]


# -- per-slice helpers -------------------------------------------------------------

def _saddles(t, j):
    return sorted((p for p in critical_points_on_slice(t, j) if p.is_saddle), key=lambda p: p.sigma)


def _stack_at(t, j, c) -> int:
    leaves = level_intervals(t, j, c)
    return max((lf.stack for lf in leaves), default=0)


def _away_from_vertices(j) -> bool:
    return min(abs(j - v) for v in (0.0, 1.0, 2.0, 3.0)) > VERTEX_GAP


def solve_pair(t, j0, j1, a: int, b: int, n_saddles: int):
    """``j`` in ``[j0, j1]`` where saddles ``a`` and ``b`` have equal value."""
    def g(j):
        s = _saddles(t, j)
        if len(s) != n_saddles:
            raise ValueError
        return s[a].value - s[b].value
    try:
        ga, gb = g(j0), g(j1)
        if ga * gb > 0:
            return None
        return brentq(g, j0, j1, xtol=1e-15, rtol=1e-15, maxiter=200)
    except ValueError:
        return None


def solve_triple(t, j0, idx, n_saddles: int, free: int):
    """Vary ``(j, t[free])`` until three saddles share one value."""
    t = np.asarray(t, float)

    def F(v):
        tt = t.copy()
        tt[free] = v[1]
        s = _saddles(tt, v[0])
        if len(s) != n_saddles:
            return np.array([1.0, 1.0])
        return np.array([s[idx[0]].value - s[idx[1]].value, s[idx[1]].value - s[idx[2]].value])

    sol = root(F, [j0, t[free]], method="hybr", options={"xtol": 1e-14})
    if not np.all(np.isfinite(sol.x)) or np.max(np.abs(F(sol.x))) > 1e-11:
        return None
    tt = t.copy()
    tt[free] = sol.x[1]
    return tt, float(sol.x[0])


# -- cell scan ----------------------------------------------------------------------

@dataclass
class CellResult:
    index: int
    t: tuple
    max_k: int = 1
    k_counts: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)     # str(k) -> {t, j, c}
    multi_leaf: dict | None = None                    # first (j, c) with >= 2 leaves
    rank_zero_checked: int = 0
    rank_zero_violations: list = field(default_factory=list)
    morse_failures: list = field(default_factory=list)
    features: dict = field(default_factory=dict)      # "flap" / "swallowtail" -> {t, ...}


def rank_zero_check(t, j_grid, tol: float = 1e-7) -> tuple[int, list]:
    """Lift every slice critical point off the vertex slices and test ``rank dF_t > 0``."""
    checked, bad = 0, []
    for j in j_grid:
        if not _away_from_vertices(j):
            continue
        for p in critical_points_on_slice(t, j):
            if p.fixed:
                continue
            z = ambient.lift(j, p.h, p.phi)
            checked += 1
            if ambient.dFt_rank(z, t, tol=tol) == 0:
                bad.append({"t": list(map(float, t)), "j": float(j), "h": float(p.h), "phi": float(p.phi)})
    return checked, bad


def _note(res: CellResult, k: int, t, j, c):
    res.k_counts[str(k)] = res.k_counts.get(str(k), 0) + 1
    res.max_k = max(res.max_k, k)
    key = str(k)
    if key not in res.witnesses:
        res.witnesses[key] = {"t": [float(v) for v in t], "j": float(j), "c": float(c)}


def _try_triples(res: CellResult, t, stretch, new, n, window: float = 0.15):
    """Pair crossings sharing a saddle and close in ``j`` seed a triple solve."""
    a, b, js = new
    for a2, b2, js2 in stretch:
        idx = tuple(sorted({a, b, a2, b2}))
        if len(idx) != 3 or abs(js - js2) > window:
            continue
        for free in range(4):
            out = solve_triple(t, 0.5 * (js + js2), idx, n, free)
            if out is None:
                continue
            tt, jt = out
            if not (0.0 < jt < 3.0) or not _away_from_vertices(jt):
                continue
            c = _saddles(tt, jt)[idx[1]].value
            k = _stack_at(tt, jt, c)
            if k >= 2:
                _note(res, k, tt, jt, c)
            if k >= 4:
                return


def cell_features(t, grid: int = 32, min_overlap: float = 0.9) -> dict:
    """Cheap flap and swallowtail detection for one ``t``.

    A flap is a non-main sheet of the unfolded diagram lying (almost) only
    over cells with two or more leaves.
    """
    from .bifurcation import critical_value_curves, find_swallowtails, unfolded_diagram

    out = {}
    D = critical_value_curves(t, j_grid=(np.arange(2 * grid) + 0.5) * 3.0 / (2 * grid), n_sigma=256)
    for cv in D.curves:
        for c1, c2, hit in find_swallowtails(cv):
            out.setdefault("swallowtail", {"t": list(t), "cusps": [c1.param, c2.param], "crossing": list(hit)})
    d = unfolded_diagram(t, grid=(grid, grid), with_curves=False)
    for f in d.features:
        if f["kind"] == "flap" and f["overlap_cells"] >= min_overlap * f["cells"]:
            if "flap" not in out or f["cells"] > out["flap"]["cells"]:
                out["flap"] = {"t": list(t), "cells": f["cells"], "j_range": f["j_range"]}
    return out


def scan_cell(index: int, t, j_grid, c_grid=0, localization: bool = True,
              triples: bool = True, stacks: bool = True, features: bool = False) -> CellResult:
    """Scan one parameter value ``t`` over slices ``j_grid``.

    With ``stacks=False`` only the rank-zero localization check runs.
    """
    t = tuple(float(v) for v in t)
    res = CellResult(index, t)
    j_grid = np.asarray(j_grid, float)
    if features:
        res.features = cell_features(t)
    if not stacks:
        if localization:
            res.rank_zero_checked, res.rank_zero_violations = rank_zero_check(t, j_grid[:: max(1, len(j_grid) // 24)])
        return res
    prev = None
    stretch: list = []        # pair crossings since the saddle count last changed
    for j in j_grid:
        crit = critical_points_on_slice(t, j)
        if morse_count(crit) != 2 and t[0] != 0.0:
            res.morse_failures.append(float(j))
        sad = sorted((p for p in crit if p.is_saddle), key=lambda p: p.sigma)
        for p in sad:
            k = _stack_at(t, j, p.value)
            if k >= 2 and _away_from_vertices(j):
                _note(res, k, t, j, p.value)
        if c_grid and res.multi_leaf is None and sad:
            vals = [p.value for p in crit]
            for c in np.linspace(min(vals), max(vals), int(c_grid) + 2)[1:-1]:
                if len(level_intervals(t, j, c, critical=crit)) >= 2:
                    res.multi_leaf = {"t": list(t), "j": float(j), "c": float(c)}
                    break
        if prev is None or len(prev[1]) != len(sad):
            stretch = []
        elif len(sad) >= 2 and _away_from_vertices(j) and _away_from_vertices(prev[0]):
            j0, s0 = prev
            n = len(sad)
            for a, b in itertools.combinations(range(n), 2):
                if (s0[a].value - s0[b].value) * (sad[a].value - sad[b].value) >= 0:
                    continue
                js = solve_pair(t, j0, j, a, b, n)
                if js is None:
                    continue
                c = _saddles(t, js)[a].value
                k = _stack_at(t, js, c)
                if k >= 2 and _away_from_vertices(js):
                    _note(res, k, t, js, c)
                if triples:
                    _try_triples(res, t, stretch, (a, b, js), n)
                stretch.append((a, b, js))
        prev = (j, sad)
    if localization:
        res.rank_zero_checked, res.rank_zero_violations = rank_zero_check(t, j_grid[:: max(1, len(j_grid) // 24)])
    return res


# -- merging, checkpoints, driver ------------------------------------------------------

@dataclass
class ScanReport:
    cells: int = 0
    max_k: int = 1
    k_counts: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    witness_cells: dict = field(default_factory=dict)
    multi_leaf: dict | None = None
    multi_leaf_cell: int | None = None
    rank_zero_checked: int = 0
    rank_zero_violations: list = field(default_factory=list)
    morse_failures: int = 0
    exceeds_bound: list = field(default_factory=list)
    features: dict = field(default_factory=dict)
    feature_cells: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["k_counts"] = dict(sorted(d["k_counts"].items(), key=lambda kv: int(kv[0])))
        d["witnesses"] = dict(sorted(d["witnesses"].items(), key=lambda kv: int(kv[0])))
        d["witness_cells"] = dict(sorted(d["witness_cells"].items(), key=lambda kv: int(kv[0])))
        return d


def merge(report: ScanReport, cell: CellResult) -> ScanReport:
    report.cells += 1
    report.max_k = max(report.max_k, cell.max_k)
    for k, n in cell.k_counts.items():
        report.k_counts[k] = report.k_counts.get(k, 0) + n
    for k, w in cell.witnesses.items():
        if k not in report.witness_cells or cell.index < report.witness_cells[k]:
            report.witnesses[k] = w
            report.witness_cells[k] = cell.index
    if cell.multi_leaf is not None and (report.multi_leaf_cell is None or cell.index < report.multi_leaf_cell):
        report.multi_leaf = cell.multi_leaf
        report.multi_leaf_cell = cell.index
    for name, w in cell.features.items():
        if name not in report.feature_cells or cell.index < report.feature_cells[name]:
            report.features[name] = w
            report.feature_cells[name] = cell.index
    report.rank_zero_checked += cell.rank_zero_checked
    report.rank_zero_violations = sorted(report.rank_zero_violations + cell.rank_zero_violations,
                                         key=lambda v: (v["t"], v["j"], v["h"]))
    report.morse_failures += len(cell.morse_failures)
    if cell.max_k > MAX_STACK:
        report.exceeds_bound = sorted(report.exceeds_bound + [cell.index])
    return report


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _load_checkpoint(path: Path | None) -> dict[int, CellResult]:
    if path is None or not path.exists():
        return {}
    data = json.loads(path.read_text())
    out = {}
    for d in data.get("cells", []):
        d["t"] = tuple(d["t"])
        out[int(d["index"])] = CellResult(**d)
    return out


def _cell_job(args):
    return scan_cell(*args)


def scan(t_grid, j_grid=None, c_grid: int = 0, jobs: int = 1, checkpoint: str | Path | None = None,
         checkpoint_every: int = 16, localization: bool = True, triples: bool = True,
         stacks: bool = True, features: bool = False) -> ScanReport:
    """Scan every ``t`` in ``t_grid``; resumable through ``checkpoint``."""
    if j_grid is None:
        j_grid = default_j_grid()
    j_grid = np.asarray(j_grid, float)
    ckpt = Path(checkpoint) if checkpoint else None
    done = _load_checkpoint(ckpt)
    todo = [(i, tuple(t), j_grid, c_grid, localization, triples, stacks, features)
            for i, t in enumerate(t_grid) if i not in done]

    def save():
        if ckpt is not None:
            cells = [asdict(done[i]) for i in sorted(done)]
            _atomic_write(ckpt, json.dumps({"cells": cells}))

    if jobs <= 1:
        for n, args in enumerate(todo, 1):
            done[args[0]] = _cell_job(args)
            if n % checkpoint_every == 0:
                save()
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            for n, res in enumerate(ex.map(_cell_job, todo, chunksize=1), 1):
                done[res.index] = res
                if n % checkpoint_every == 0:
                    save()
    save()
    report = ScanReport()
    for i in sorted(done):
        merge(report, done[i])
    return report


def pinned_witnesses() -> dict:
    """Witness parameters shipped with the package (found by earlier scans)."""
    from importlib import resources

    return json.loads(resources.files(__package__).joinpath("data/witnesses.json").read_text())
