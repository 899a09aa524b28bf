import math

import numpy as np
import pytest

from hypersemitoric.bifurcation import (
    QUARTIC_CUSP,
    CriticalValueCurve,
    critical_value_curves,
    detect_cusps,
    find_swallowtails,
    quartic_model,
    trace_critical_curves,
    unfolded_diagram,
)
from hypersemitoric.levelset import level_set
from hypersemitoric.reduced import PoleType, get_slice, level_intervals
from hypersemitoric.scan import pinned_witnesses

W = pinned_witnesses()


def circle_model(p, x):
    # f' = x^2 + p^2 - 1: the critical set is the unit circle, folded at p = +-1
    x = np.asarray(x, float)
    return np.stack([x ** 3 / 3 + (p * p - 1) * x, x * x + p * p - 1, 2 * x, 2 + 0 * x])


def test_quartic_cusp_location():
    s = np.linspace(-0.8, 0.8, 161)
    curves = trace_critical_curves(quartic_model, s, 400, x_range=(-2.0, 2.0), periodic=False)
    cusps = [c for cv in curves for c in detect_cusps(cv, quartic_model)]
    assert len(cusps) == 2
    np.testing.assert_allclose(sorted(c.param for c in cusps), [-QUARTIC_CUSP, QUARTIC_CUSP], atol=1e-9)
    for c in cusps:
        assert abs(c.x) == pytest.approx(1 / math.sqrt(3), abs=1e-8)
        assert not c.flat


def test_closed_curve_has_even_cusps():
    p = np.linspace(-1.5, 1.5, 121)
    (cv,) = trace_critical_curves(circle_model, p, 200, x_range=(-2.0, 2.0), periodic=False)
    assert cv.closed
    cusps = detect_cusps(cv, circle_model)
    assert len(cusps) % 2 == 0
    np.testing.assert_allclose(sorted(c.param for c in cusps), [-1, 1], atol=1e-9)


def test_detect_cusps_needs_samples():
    cv = CriticalValueCurve(*(np.zeros(3) for _ in range(5)), kinds=[None] * 3)
    with pytest.raises(ValueError):
        detect_cusps(cv)


@pytest.fixture(scope="module")
def toric_curves():
    return critical_value_curves((0, 0, 0, 0), n_sigma=256)


def test_toric_curves_lie_on_boundary(toric_curves):
    assert not toric_curves.all_cusps()
    for j, v in toric_curves.points():
        sl = get_slice((0, 0, 0, 0), j)
        assert min(abs(v - sl.lo), abs(v - sl.hi)) < 1e-9


def test_toric_boundary_is_covered(toric_curves):
    pts = toric_curves.points()
    for j in np.linspace(0.01, 2.99, 60):
        sl = get_slice((0, 0, 0, 0), j)
        for v in (sl.lo, sl.hi):
            assert np.min(np.hypot(pts[:, 0] - j, pts[:, 1] - v)) < 3 / 512


def test_toric_distinguished_values(toric_curves):
    got = sorted((j, round(v, 12)) for j, v, _ in toric_curves.distinguished)
    assert got == [(1.0, 0.0), (1.0, 3.0), (2.0, 0.0), (2.0, 3.0)]
    assert all(k is PoleType.ELLIPTIC_ELLIPTIC for _, _, k in toric_curves.distinguished)


def test_swallowtail_witness():
    D = critical_value_curves(W["swallowtail"]["t"])
    tails = [(cv, st) for cv in D.curves for st in find_swallowtails(cv)]
    assert len(tails) == 1
    cv, (c1, c2, hit) = tails[0]
    # the tail is bounded by exactly two cusps, with the crossing between them
    assert c1.param < hit[0] < c2.param
    inner = [c for c in cv.cusps if c1.param <= c.param <= c2.param]
    assert len(inner) == 2


def test_j_grid_validation():
    with pytest.raises(ValueError):
        critical_value_curves((0, 0, 0, 0), j_grid=[0.0, 0.5, 1.5])


@pytest.fixture(scope="module")
def toric_unfolded():
    return unfolded_diagram((0, 0, 0, 0), grid=(48, 48), with_curves=False)


def test_toric_unfolded_single_layer(toric_unfolded):
    assert toric_unfolded.n_layers == 1
    assert toric_unfolded.count_grid().max() == 1
    assert not [f for f in toric_unfolded.features if f["kind"] == "flap"]


def test_toric_tau_is_identity(toric_unfolded, rng):
    for j, h in rng.uniform(0.05, 2.95, size=(100, 2)):
        sl = get_slice((0, 0, 0, 0), j)
        inside = sl.lo < h < sl.hi
        assert toric_unfolded.tau_preimage((j, h)) == ([0] if inside else [])


def test_tau_outside_strip(toric_unfolded):
    assert toric_unfolded.tau_preimage((3.5, 1.0)) == []


def test_focus_focus_markers():
    d = unfolded_diagram(W["focus_focus"]["t"], grid=(48, 48))
    ff = [f for f in d.features if f["kind"] == "focus-focus"]
    # all four vertex poles turn focus-focus, two on each vertex slice
    assert sorted(f["j"] for f in ff) == [1.0, 1.0, 2.0, 2.0]
    assert d.n_layers == 1


@pytest.fixture(scope="module")
def flap_diagram():
    return unfolded_diagram(W["flap"]["t"], grid=(64, 64))


def test_flap_is_second_layer_over_lens(flap_diagram):
    d = flap_diagram
    flaps = [f for f in d.features if f["kind"] == "flap"]
    big = max(flaps, key=lambda f: f["cells"])
    assert big["cells"] >= 40
    # every cell of the flap carries two leaves, one on the main sheet
    main = d.main_layer()
    for i in range(len(d.j)):
        for k in range(len(d.c)):
            ids = [l for l, _, _ in d.cells[i][k]]
            if big["layer"] in ids:
                assert sorted(ids) == sorted([main, big["layer"]])
    # the lens ends at the two cusps of the critical-value curves
    cj = sorted(c.param for c in d.critical.all_cusps())
    assert cj[0] - 0.05 < big["j_range"][0] and big["j_range"][1] < cj[-1] + 0.05


def test_flap_counts_match_level_sets(flap_diagram):
    d = flap_diagram
    lid = max((f for f in d.features if f["kind"] == "flap"), key=lambda f: f["cells"])["layer"]
    cells = [(i, k) for i in range(len(d.j)) for k in range(len(d.c))
             if any(l == lid for l, _, _ in d.cells[i][k])]
    for i, k in cells[::5]:
        ls = level_set(d.t, d.j[i], d.c[k], grid_n=256)
        assert len(ls) == 2 or ls.diagnostics


@pytest.mark.parametrize("key", ["flap", "swallowtail", "multi_leaf"])
def test_unfolded_identity(key, rng):
    t = W[key]["t"]
    d = unfolded_diagram(t, grid=(48, 48), with_curves=False)
    lo, hi = d.c[0], d.c[-1]
    for j, c in zip(rng.uniform(0.02, 2.98, 60), rng.uniform(lo, hi, 60)):
        ids = d.tau_preimage((j, c))
        assert -1 not in ids
        assert len(ids) == len(level_intervals(t, j, c))
