import json
import random

import numpy as np
import pytest

from hypersemitoric.scan import (
    MAX_STACK,
    ScanReport,
    cell_features,
    coarse_t_grid,
    default_j_grid,
    merge,
    pinned_witnesses,
    rank_zero_check,
    scan,
    scan_cell,
)

J16 = default_j_grid(16)
TS = [(0.0, 0.0, 0.0, 0.0), (0.75, 1.0, 1.0, 0.75), (0.25, 0.0, 0.0, 0.25), (0.5, 0.25, 0.75, 1.0)]


def test_coarse_grid_shape():
    g = coarse_t_grid()
    assert len(g) == 5 ** 4 and g[0] == (0, 0, 0, 0) and g[-1] == (1, 1, 1, 1)


def test_j_grid_avoids_vertex_slices():
    j = default_j_grid()
    assert np.all((j > 0) & (j < 3)) and not np.any(np.isin(j, [1.0, 2.0]))
    assert np.all(np.diff(j) > 0)


def test_unperturbed_scan_is_trivial():
    rep = scan([(0, 0, 0, 0)], J16)
    assert rep.max_k == 1 and not rep.witnesses
    assert not rep.rank_zero_violations and rep.rank_zero_checked > 0


def test_scan_finds_a_stacked_torus():
    rep = scan([(0.75, 1.0, 1.0, 0.75)], default_j_grid(32), localization=False)
    assert rep.max_k >= 2 and "2" in rep.witnesses
    assert rep.max_k <= MAX_STACK and not rep.exceeds_bound


@pytest.fixture(scope="module")
def cells():
    return [scan_cell(i, t, J16, c_grid=4) for i, t in enumerate(TS)]


def test_merge_is_order_independent(cells):
    ref = ScanReport()
    for c in cells:
        merge(ref, c)
    for seed in range(4):
        order = cells[:]
        random.Random(seed).shuffle(order)
        rep = ScanReport()
        for c in order:
            merge(rep, c)
        assert json.dumps(rep.to_dict(), sort_keys=True) == json.dumps(ref.to_dict(), sort_keys=True)


def test_merge_picks_lowest_cell_witness(cells):
    rep = ScanReport()
    for c in reversed(cells):
        merge(rep, c)
    for k, idx in rep.witness_cells.items():
        assert idx == min(c.index for c in cells if k in c.witnesses)


def test_checkpoint_resume(tmp_path, cells):
    ck = tmp_path / "ckpt.json"
    scan(TS[:2], J16, c_grid=4, checkpoint=ck, checkpoint_every=1)
    assert len(json.loads(ck.read_text())["cells"]) == 2
    resumed = scan(TS, J16, c_grid=4, checkpoint=ck)
    fresh = scan(TS, J16, c_grid=4)
    assert resumed.to_dict() == fresh.to_dict()
    assert len(json.loads(ck.read_text())["cells"]) == len(TS)


def test_parallel_matches_serial():
    a = scan(TS[:3], J16, jobs=1)
    b = scan(TS[:3], J16, jobs=2)
    assert a.to_dict() == b.to_dict()


def test_localization_only_mode():
    res = scan_cell(0, (0.3, -1.2, 0.4, 1.9), default_j_grid(), stacks=False)
    assert res.max_k == 1 and not res.witnesses
    assert res.rank_zero_checked > 0 and not res.rank_zero_violations


def test_rank_zero_localization_random_t(rng):
    for t in rng.uniform(-2, 2, size=(3, 4)):
        n, bad = rank_zero_check(tuple(t), default_j_grid(16))
        assert n > 0 and bad == []


def test_feature_detection_on_witnesses():
    w = pinned_witnesses()
    f = cell_features(w["swallowtail"]["t"])
    assert "swallowtail" in f
    c1, c2 = f["swallowtail"]["cusps"]
    assert c1 < f["swallowtail"]["crossing"][0] < c2
    assert "flap" in cell_features(w["flap"]["t"])
    assert cell_features((0, 0, 0, 0)) == {}


def test_pinned_witness_file_shape():
    w = pinned_witnesses()
    assert set(w["stack"]) == {"2", "3", "4"}
    for entry in w["stack"].values():
        assert len(entry["t"]) == 4 and 0 < entry["j"] < 3
