import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypersemitoric.classify import (
    BouquetGraph,
    LeafKind,
    UnclassifiedLeaf,
    bouquet,
    is_twisted,
    leaf_components,
    leaf_components_exact,
    period_label,
    saddle_monodromy,
    same_leaf_structure,
    stabilizer_order,
    stabilizer_order_brute,
    stack_count,
)
from hypersemitoric.levelset import Arc, LevelComponent
from hypersemitoric.reduced import CriticalPoint, CriticalType, get_slice
from hypersemitoric.scan import pinned_witnesses

from conftest import random_interior

W = pinned_witnesses()["stack"]


def _saddle(h):
    return CriticalPoint(1.5, h, math.pi, 1.0, 0.0, CriticalType.HYPERBOLIC_REGULAR)


def _arc(a, b, h0=1.2, h1=1.8):
    pts = np.column_stack([np.linspace(h0, h1, 5), np.zeros(5)])
    return Arc(pts, np.zeros((5, 3)), (a, b))


def chain_fixture(n_loops):
    """Synthetic chain of ``n_loops`` circles touching at ``n_loops - 1`` saddles."""
    saddles = [_saddle(1.0 + 0.2 * k) for k in range(n_loops - 1)]
    if not saddles:
        return LevelComponent([Arc(np.array([[1.2, 0.0], [1.4, 1.0], [1.2, 0.0]]), np.zeros((3, 3)),
                                   (None, None), closed=True)])
    arcs = [_arc(0, 0)]
    for k in range(n_loops - 2):
        arcs += [_arc(k, k + 1), _arc(k, k + 1)]
    arcs.append(_arc(n_loops - 2, n_loops - 2))
    return LevelComponent(arcs, saddles=saddles)


@pytest.mark.parametrize("n, expected", [(1, 1), (2, 2), (3, 3), (4, 4), (7, 7)])
def test_stack_count_of_chains(n, expected):
    assert stack_count(chain_fixture(n)) == expected


def test_stack_count_degenerate():
    comp = chain_fixture(2)
    comp.saddles[0] = CriticalPoint(1.5, 1.0, 0.0, 1.0, 0.0, CriticalType.DEGENERATE)
    with pytest.raises(UnclassifiedLeaf):
        stack_count(comp)
    with pytest.raises(UnclassifiedLeaf):
        bouquet((0, 0, 0, 0), comp, 1.5)


def test_bouquet_of_circle():
    g = bouquet((0, 0, 0, 0), chain_fixture(1), 1.5)
    assert g.n_vertices == 0 and g.n_edges == 1 and g.edges[0][2] == 1
    assert g.is_chain() and g.betti1 == 1


def test_bouquet_of_figure_eight():
    g = bouquet((0, 0, 0, 0), chain_fixture(2), 1.5)
    assert g.n_vertices == 1 and g.n_edges == 2
    assert all(a == b == "s0" for a, b, _ in g.edges)
    assert g.is_chain() and g.betti1 == 2


def test_bouquet_of_four_chain():
    g = bouquet((0, 0, 0, 0), chain_fixture(4), 1.5)
    # three crossings in a path; end crossings carry one loop each
    assert g.n_vertices == 3 and g.n_edges == 6 and g.betti1 == 4
    assert g.is_chain()
    assert all(lab == 1 for _, _, lab in g.edges)
    assert all(lab == 1 for _, lab, _ in g.vertices)


def test_bouquet_json_shape():
    d = bouquet((0, 0, 0, 0), chain_fixture(3), 1.5).to_dict(component_ref=7)
    assert set(d) == {"nodes", "edges", "component"}
    assert {"id", "label"} <= set(d["nodes"][0]) and {"from", "to", "label"} <= set(d["edges"][0])


def test_non_chain_detected():
    g = BouquetGraph([("s0", 1, "saddle"), ("s1", 1, "saddle")],
                     [("s0", "s1", 1), ("s0", "s1", 1), ("s0", "s1", 1), ("s0", "s1", 1)])
    assert not g.is_chain()


def test_isomorphism_respects_labels():
    a = BouquetGraph([("s0", 1, "saddle")], [("s0", "s0", 1), ("s0", "s0", 1)])
    b = BouquetGraph([("x", 1, "saddle")], [("x", "x", 1), ("x", "x", 1)])
    c = BouquetGraph([("x", 2, "saddle")], [("x", "x", 1), ("x", "x", 1)])
    assert a.isomorphic(b) and not a.isomorphic(c)


def test_twist_detector_on_synthetic_labels():
    assert saddle_monodromy(1) == (0, 1, 2, 3)
    assert saddle_monodromy(2) == (2, 3, 0, 1)
    assert saddle_monodromy(3) == (0, 1, 2, 3)
    plain = BouquetGraph([("s0", 1, "saddle")], [("s0", "s0", 1)] * 2)
    twisted = BouquetGraph([("s0", 2, "saddle")], [("s0", "s0", 2)] * 2)
    assert not is_twisted(plain) and is_twisted(twisted)


def test_period_label_generic_points(rng):
    x = random_interior(rng, 10_000)
    assert all(period_label(0, a, b) == 1 for a, b in x)


@pytest.mark.parametrize("x", [(0.5, 0.5), (1.5, 0.0), (3.0, 1.5), (2.5, 2.5), (0.0, 1.5), (0.5, 2.5)])
def test_period_label_facet_interiors(x):
    # facets with u_y = 0 are fixed by the J-circle; the others are free
    expected = 0 if x[0] in (0.0, 3.0) else 1
    assert period_label(0, *x) == expected


@pytest.mark.parametrize("v", [(1, 0), (2, 0), (1, 3), (2, 3), (0, 1), (3, 2)])
def test_period_label_vertices(v):
    assert period_label(0, *v) == 0


@pytest.mark.parametrize("normals, generator, expected", [
    ([(1, 2)], (1, 0), 2),
    ([(3, -2)], (1, 0), 2),
    ([(1, 3)], (1, 0), 3),
    ([(0, 1)], (1, 0), 1),
    ([(1, 0)], (1, 0), 0),
    ([], (1, 0), 1),
    ([(1, 0), (0, 1)], (1, 0), 0),
])
def test_stabilizer_order_fixtures(normals, generator, expected):
    assert stabilizer_order(normals, generator) == expected
    assert stabilizer_order_brute(normals, generator, max_order=8) == expected


@given(st.integers(-5, 5), st.integers(-5, 5))
def test_stabilizer_order_matches_brute(a, b):
    if math.gcd(a, b) != 1:
        return
    assert stabilizer_order([(a, b)]) == stabilizer_order_brute([(a, b)], max_order=6)


def test_unperturbed_leaf_is_regular_torus():
    for j in (0.5, 1.5, 2.5):
        sl = get_slice((0, 0, 0, 0), j)
        n, leaves = leaf_components((0, 0, 0, 0), j, sl.lo + 0.4 * sl.width, grid_n=128)
        assert n == 1 and leaves[0].kind is LeafKind.REGULAR_TORUS and leaves[0].k == 1


def test_unperturbed_top_value_is_point_leaf():
    # at a vertex slice the top of the slice is an elliptic-elliptic point
    n, leaves = leaf_components_exact((0, 0, 0, 0), 1.0, 3.0)
    assert n == 1 and leaves[0].kind is LeafKind.POINT_LEAF


@pytest.mark.parametrize("k", ["2", "3", "4"])
def test_pinned_witness_routes_agree(k):
    w = W[k]
    n2, grid = leaf_components(w["t"], w["j"], w["c"], grid_n=512)
    n1, exact = leaf_components_exact(w["t"], w["j"], w["c"])
    assert max(d.k for d in exact) == int(k)
    assert max(d.k for d in grid) == int(k)
    assert same_leaf_structure(grid, exact)
    for d in grid:
        if d.kind is LeafKind.STACKED_TORUS:
            assert d.bouquet.is_chain() and d.k == 1 + len(d.component.saddles)
            assert not d.twisted


@pytest.mark.parametrize("k", ["2", "3", "4"])
def test_pinned_witness_refinement(k):
    w = W[k]
    _, a = leaf_components(w["t"], w["j"], w["c"], grid_n=512)
    _, b = leaf_components(w["t"], w["j"], w["c"], grid_n=1024)
    assert same_leaf_structure(a, b)


def test_stacked_torus_kind():
    w = W["2"]
    n, leaves = leaf_components(w["t"], w["j"], w["c"])
    assert n == 1
    assert leaves[0].kind is LeafKind.STACKED_TORUS and leaves[0].k == 2
    assert leaves[0].to_dict()["stack_count"] == 2
