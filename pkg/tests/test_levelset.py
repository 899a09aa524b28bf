import json

import numpy as np
import pytest

from hypersemitoric.errors import ConfigError, DomainError
from hypersemitoric.levelset import level_set, sphere_grid
from hypersemitoric.reduced import critical_points_on_slice, get_slice, level_intervals
from hypersemitoric.scan import pinned_witnesses

W = pinned_witnesses()["stack"]
GENERIC = (0.6, 0.3, -0.4, 0.2)


def test_grid_shape_and_seam():
    u, phi, V = sphere_grid(GENERIC, 1.3, 16)
    assert V.shape == (16, 17)
    np.testing.assert_allclose(V[:, 0], V[:, -1])
    # the poles are single points
    assert np.ptp(V[0]) < 1e-12 and np.ptp(V[-1]) < 1e-12


def test_bad_arguments():
    with pytest.raises(ConfigError):
        level_set(GENERIC, 1.3, 0.0, grid_n=4)
    with pytest.raises(DomainError):
        level_set(GENERIC, 3.5, 0.0)


@pytest.mark.parametrize("j", [0.4, 1.5, 2.6])
def test_unperturbed_single_circle(j):
    sl = get_slice((0, 0, 0, 0), j)
    ls = level_set((0, 0, 0, 0), j, sl.lo + 0.37 * sl.width, grid_n=128)
    assert len(ls) == 1
    (comp,) = ls.components
    assert len(comp.arcs) == 1 and comp.arcs[0].closed and not comp.saddles


def test_empty_level():
    assert len(level_set(GENERIC, 1.3, 1e3, grid_n=64)) == 0


@pytest.mark.parametrize("t", [GENERIC, (0.75, 1, 1, 0.75), (0.8, 0.9, 0.9, 0.6)])
def test_component_count_matches_exact_route(t):
    rng = np.random.default_rng(11)
    for j in rng.uniform(0.05, 2.95, 6):
        crit = critical_points_on_slice(t, j)
        vals = np.array([p.value for p in crit])
        for c in rng.uniform(vals.min(), vals.max(), 6):
            if np.min(np.abs(vals - c)) < 1e-3 * max(1.0, np.ptp(vals)):
                continue
            assert len(level_set(t, j, c, grid_n=256, critical=crit)) == len(level_intervals(t, j, c, critical=crit))


def test_figure_eight():
    w = W["2"]
    ls = level_set(w["t"], w["j"], w["c"])
    assert not ls.diagnostics
    (comp,) = ls.components
    assert len(comp.saddles) == 1 and len(comp.arcs) == 2
    assert all(a.ends == (0, 0) for a in comp.arcs)


def test_values_on_polylines():
    w = W["3"]
    ls = level_set(w["t"], w["j"], w["c"])
    sl = get_slice(w["t"], w["j"])
    for comp in ls.components:
        for pts in comp.polylines:
            err = np.abs(sl.H(pts[:, 0], pts[:, 1]) - w["c"])
            # marching squares interpolates linearly inside a cell
            assert np.max(err) < 1e-3 * sl.value_scale


def test_json_output():
    w = W["2"]
    d = level_set(w["t"], w["j"], w["c"], grid_n=128).to_dict()
    text = json.dumps(d)
    back = json.loads(text)
    assert back["components"][0]["closed"] == [False, False]
    assert {"h", "phi", "value", "kind"} <= set(back["components"][0]["critical"][0])
    assert all(len(p) == 2 for p in back["components"][0]["polylines"][0])


def test_extremum_level_is_point():
    t = GENERIC
    j = 1.3
    ext = [p for p in critical_points_on_slice(t, j) if p.is_extremum and not p.pole]
    ls = level_set(t, j, ext[0].value, grid_n=128)
    assert any(c.point for c in ls.components)


def test_sub_cell_leaves_are_reported():
    # just above a minimum the leaf is a loop smaller than one grid cell
    t, j = GENERIC, 1.3
    lo = min((p for p in critical_points_on_slice(t, j) if p.is_extremum), key=lambda p: p.value)
    for eps in (1e-6, 1e-4, 3e-3):
        ls = level_set(t, j, lo.value + eps, grid_n=64)
        assert len(level_intervals(t, j, lo.value + eps)) == 1
        assert len(ls) == 1 or ls.diagnostics
    assert not level_set(t, j, lo.value + 1e-2, grid_n=64).diagnostics
