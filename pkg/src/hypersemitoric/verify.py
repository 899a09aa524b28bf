"""Acceptance checks for the whole package.

Each check returns a :class:`CheckResult` with the measured quantity, the
threshold it was held to and its wall time.  Checks marked tolerance-bound
compare a floating-point residual against a threshold that ``tol`` can
override; the others are combinatorial.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from importlib import resources
from typing import Callable

import numpy as np

from . import ambient as A
from .bifurcation import critical_value_curves, unfolded_diagram
from .classify import leaf_components, leaf_components_exact, same_leaf_structure
from .levelset import level_set
from .polygon import OCTAGON_VERTICES, VERTEX_MODULI, make_octagon, sample_interior
from .reduced import critical_points_on_slice, get_slice, level_intervals, morse_count, reduced_H
from .scan import MAX_STACK, coarse_t_grid, default_j_grid, pinned_witnesses, scan, scan_cell

OCTAGON = make_octagon()
DEFAULT_SEED = 20240607


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    measured: float | None
    threshold: float | None
    runtime: float
    budget: float
    tol_bound: bool
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        meas = "" if self.measured is None else f" measured={self.measured:.3g}"
        thr = "" if self.threshold is None else f" threshold={self.threshold:.3g}"
        return (f"[{mark}] {self.id:2d} {self.name}:{meas}{thr} "
                f"time={self.runtime:.1f}s/{self.budget:g}s {self.detail}").rstrip()


def _timed(fn: Callable[[], tuple], cid: int, name: str, budget: float, threshold, tol_bound: bool) -> CheckResult:
    t0 = time.perf_counter()
    ok, measured, detail = fn()
    dt = time.perf_counter() - t0
    if dt > budget:
        ok = False
        detail = (detail + " over time budget").strip()
    return CheckResult(cid, name, bool(ok), None if measured is None else float(measured),
                       threshold, dt, budget, tol_bound, detail)


def grid_leaf_count(t, j, c, grids=(64, 256, 1024)) -> int:
    """Leaf count by marching squares, refining while leaves fall below the grid."""
    for n in grids:
        ls = level_set(t, j, c, grid_n=n)
        if not ls.diagnostics:
            break
    return len(ls)


# -- individual checks ---------------------------------------------------------------

def check_rank_zero_points(rng, tol=None) -> CheckResult:
    thr = 1e-12 if tol is None else tol

    def run():
        worst, ranks_ok, values_ok = 0.0, True, True
        ts = rng.uniform(-2, 2, size=(20, 4))
        for v, z in A.fixed_point_representatives().items():
            worst = max(worst, float(np.max(np.abs(A.constraint_residual(z)))))
            ranks_ok &= all(A.dFt_rank(z, t) == 0 for t in ts)
            # exact: squared moduli are the integers 2 l_k(v), so J = l_1, H = l_3 exactly
            sq = np.abs(np.asarray(VERTEX_MODULI[v])) ** 2
            ints = np.rint(sq)
            values_ok &= bool(np.all(np.abs(sq - ints) < 1e-12))
            values_ok &= bool(np.array_equal(ints, 2 * OCTAGON.facet_values(np.asarray(v, float))))
            values_ok &= (ints[0] / 2, ints[2] / 2) == tuple(map(float, v))
            # floating point evaluation agrees to a few ulps
            obs = A.eval_observables(z)
            values_ok &= abs(float(obs.J) - v[0]) <= 8 * np.finfo(float).eps * max(1, v[0])
            values_ok &= abs(float(obs.H) - v[1]) <= 8 * np.finfo(float).eps * max(1, v[1])
        expected = {(1, 0), (2, 3), (1, 3), (2, 0)}
        ok = worst < thr and ranks_ok and values_ok and set(VERTEX_MODULI) == expected
        return ok, worst, f"rank0={ranks_ok} exact_values={values_ok}"
    return _timed(run, 1, "rank-zero points", 1.0, thr, True)


def check_integrability(rng, tol=None) -> CheckResult:
    thr = 1e-8 if tol is None else tol

    def run():
        x = sample_interior(OCTAGON, rng, 1000)
        z = A.sample_fiber_point(x, rng.uniform(0, 2 * np.pi, size=(1000, 8)))
        worst = exact = 0.0
        for t in rng.uniform(-2, 2, size=(10, 4)):
            exact = max(exact, float(np.max(np.abs(A.poisson_bracket("J", "Ht", z, t)))))
            # finite-difference gradients: independent of the analytic ones
            worst = max(worst, float(np.max(np.abs(A.poisson_bracket_num("J", "Ht", z, t)))))
        return worst < thr and exact < thr, worst, f"1000 points x 10 t, analytic max {exact:.1e}"
    return _timed(run, 2, "integrability {J, H_t}", 10.0, thr, True)


def check_j_period(rng, tol=None) -> CheckResult:
    thr = 1e-6 if tol is None else tol

    def run():
        x = sample_interior(OCTAGON, rng, 100)
        z = A.sample_fiber_point(x, rng.uniform(0, 2 * np.pi, size=(100, 8)))
        worst = max(float(np.max(np.abs(A.flow("J", zz, 2 * np.pi) - zz))) for zz in z)
        return worst < thr, worst, "100 points"
    return _timed(run, 3, "J-flow period 2pi", 10.0, thr, True)


def check_reduced_oracle(rng, tol=None) -> CheckResult:
    thr = 1e-10 if tol is None else tol

    def run():
        n = 10_000
        x = sample_interior(OCTAGON, rng, n)
        phi = rng.uniform(0, 2 * np.pi, n)
        ts = rng.uniform(-2, 2, size=(n, 4))
        z = A.lift(x[:, 0], x[:, 1], phi, gauge=rng.uniform(0, 2 * np.pi, size=(n, 8)))
        worst = 0.0
        for k in range(n):
            amb = float(A.eval_observables(z[k], ts[k]).Ht)
            red = float(reduced_H(ts[k], x[k, 0], x[k, 1], phi[k]))
            worst = max(worst, abs(amb - red))
        return worst < thr, worst, f"{n} samples"
    return _timed(run, 4, "reduced vs ambient H_t", 5.0, thr, True)


def _boundary_samples(n_per_edge: int = 512) -> np.ndarray:
    V = np.asarray(OCTAGON_VERTICES, float)
    pts = [V[i] + s[:, None] * (V[(i + 1) % len(V)] - V[i])
           for i in range(len(V)) for s in [np.linspace(0, 1, n_per_edge, endpoint=False)]]
    return np.concatenate(pts)


def _nearest(A_, B_) -> np.ndarray:
    """Distance from each row of ``A_`` to the point set ``B_``."""
    from scipy.spatial import cKDTree

    return cKDTree(B_).query(A_)[0]


def check_toric_baseline(rng, grid: int = 512) -> CheckResult:
    cell = 3.0 / grid

    def run():
        t0 = (0.0, 0.0, 0.0, 0.0)
        D = critical_value_curves(t0, j_grid=(np.arange(grid) + 0.5) * 3.0 / grid, n_sigma=grid)
        pts = D.points()
        # the slices j = 0, 3 are J-extremal: every point there is critical
        for jv in (0.0, 3.0):
            lo, hi = OCTAGON.slice_range(jv)
            pts = np.vstack([pts, np.column_stack([np.full(grid, jv), np.linspace(lo, hi, grid)])])
        bnd = _boundary_samples()
        d_out = float(np.max(_nearest(pts, bnd)))
        d_in = float(np.max(_nearest(bnd, pts)))
        hausdorff = max(d_out, d_in)
        x = sample_interior(OCTAGON, rng, 1000)
        counts_ok = 0
        for j, c in x:
            n_exact = len(level_intervals(t0, j, c))
            counts_ok += n_exact == 1 and grid_leaf_count(t0, j, c) == 1
        U = unfolded_diagram(t0, grid=(64, 64), with_curves=False)
        ok = hausdorff < cell and counts_ok == 1000 and U.n_layers == 1 and not D.all_cusps()
        return ok, hausdorff, f"single-leaf {counts_ok}/1000, layers={U.n_layers}, cusps={len(D.all_cusps())}"
    return _timed(run, 5, "toric baseline", 30.0, cell, False)


def check_rank_zero_localization(jobs: int = 1) -> CheckResult:
    def run():
        rep = scan(coarse_t_grid(), default_j_grid(), stacks=False, jobs=jobs)
        n_bad = len(rep.rank_zero_violations)
        return n_bad == 0 and rep.rank_zero_checked > 0, n_bad, \
            f"{rep.cells} t-cells, {rep.rank_zero_checked} critical points lifted"
    return _timed(run, 6, "rank-zero localization", 300.0, 0, False)


def _coarse_record() -> dict:
    return json.loads(resources.files(__package__).joinpath("data/scan_coarse.json").read_text())


def check_stacked_tori() -> CheckResult:
    def run():
        W = pinned_witnesses()["stack"]
        found, stable = [], True
        for k, w in sorted(W.items()):
            _, a = leaf_components(w["t"], w["j"], w["c"], grid_n=512)
            _, b = leaf_components(w["t"], w["j"], w["c"], grid_n=1024)
            _, e = leaf_components_exact(w["t"], w["j"], w["c"])
            found.append(max(d.k for d in a))
            stable &= same_leaf_structure(a, b) and same_leaf_structure(a, e)
        rec = _coarse_record()
        scan_ok = rec["elapsed_s"] < 1800 and set(rec["report"]["witnesses"]) >= {"2", "3", "4"}
        ok = found == [2, 3, 4] and stable and scan_ok
        return ok, max(found), f"stack counts {found}, 512/1024 stable={stable}, initial scan {rec['elapsed_s']:.0f}s"
    return _timed(run, 7, "stacked tori k=2,3,4", 60.0, None, False)


def check_sampled_bound(recheck=(0, 126, 130, 312, 499, 624)) -> CheckResult:
    def run():
        rec = _coarse_record()
        cells = rec["cell_max_k"]
        grid = coarse_t_grid()
        jg = default_j_grid()
        same = all(scan_cell(i, grid[i], jg, c_grid=rec["preset"]["c_grid"], localization=False).max_k == cells[i]
                   for i in recheck)
        mx = max(cells)
        return mx <= MAX_STACK and same, mx, f"{len(cells)} stored cells, {len(recheck)} recomputed identical={same}"
    return _timed(run, 8, "sampled bound k <= 13", 120.0, MAX_STACK, False)


def check_morse_count(rng) -> CheckResult:
    def run():
        bad = 0
        for _ in range(1000):
            t = rng.uniform(-2, 2, 4)
            j = rng.uniform(1e-3, 3 - 1e-3)
            bad += morse_count(critical_points_on_slice(t, j)) != 2
        return bad == 0, bad, "1000 random (t, j)"
    return _timed(run, 9, "sphere Morse count", 60.0, 0, False)


def unfolded_identity_keys() -> list[tuple]:
    W = pinned_witnesses()
    return [tuple(W[k]["t"]) for k in ("flap", "swallowtail", "focus_focus", "multi_leaf")] + \
        [tuple(W["stack"]["4"]["t"])]


def check_unfolded_identity(rng, n_values: int = 1000, grid: int = 64) -> CheckResult:
    def run():
        bad, total = 0, 0
        for t in unfolded_identity_keys():
            U = unfolded_diagram(t, grid=(grid, grid), with_curves=False)
            for j in rng.uniform(0.01, 2.99, n_values):
                vals = [p.value for p in critical_points_on_slice(t, j)]
                c = rng.uniform(min(vals), max(vals))
                ids = U.tau_preimage((j, c))
                total += 1
                bad += (-1 in ids) or len(ids) != grid_leaf_count(t, j, c, grids=(256, 1024))
        return bad == 0, bad, f"{total} values over 5 t"
    return _timed(run, 10, "unfolded-diagram identity", 300.0, 0, False)


# -- suite ---------------------------------------------------------------------------

def run_all(tol: float | None = None, seed: int = DEFAULT_SEED, jobs: int = 1,
            only: set[int] | None = None, log: Callable[[str], None] | None = None) -> list[CheckResult]:
    """Run the acceptance checks in order; ``log`` receives one line per check."""
    rng = np.random.default_rng(seed)
    steps = [
        (1, lambda: check_rank_zero_points(rng, tol)),
        (2, lambda: check_integrability(rng, tol)),
        (3, lambda: check_j_period(rng, tol)),
        (4, lambda: check_reduced_oracle(rng, tol)),
        (5, lambda: check_toric_baseline(rng)),
        (6, lambda: check_rank_zero_localization(jobs)),
        (7, check_stacked_tori),
        (8, check_sampled_bound),
        (9, lambda: check_morse_count(rng)),
        (10, lambda: check_unfolded_identity(rng)),
    ]
    out = []
    for cid, fn in steps:
        if only and cid not in only:
            continue
        res = fn()
        out.append(res)
        if log:
            log(res.line())
    return out


def report_dict(results: list[CheckResult]) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "checks": [asdict(r) for r in results],
        "tolerance_bound_failures": [r.id for r in results if r.tol_bound and not r.passed],
    }


def point_rank(z, ts) -> list[int]:
    """Rank of ``dF_t`` at ``z`` for each ``t``; the point must satisfy the constraints."""
    return [int(A.dFt_rank(z, t)) for t in ts]


def parse_point(text: str) -> np.ndarray:
    """Eight comma-separated entries; accepts ``√2``, ``2√2``, ``sqrt(6)`` and complex ``1+2j``."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 8:
        raise ValueError(f"expected 8 entries, got {len(parts)}")
    out = []
    for p in parts:
        q = p.replace(" ", "")
        if "√" in q:
            coef, _, rad = q.partition("√")
            out.append((float(coef) if coef not in ("", "+") else (-1.0 if coef == "-" else 1.0)) * math.sqrt(float(rad)))
        elif q.startswith("sqrt(") and q.endswith(")"):
            out.append(math.sqrt(float(q[5:-1])))
        else:
            out.append(complex(q))
    return np.asarray(out, dtype=complex)
