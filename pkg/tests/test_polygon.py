import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypersemitoric.errors import MalformedPolygonError
from hypersemitoric.polygon import (
    OCTAGON_VERTICES,
    DelzantPolygon,
    delzant_defects,
    facet_values,
    lattice_transform,
    make_octagon,
    parse_polygon,
    slice_range,
    verify_delzant,
)

P = make_octagon()


def test_octagon_vertices():
    assert P.vertices == OCTAGON_VERTICES
    assert P.n_facets == 8


def test_facet_functions_at_corner():
    v = facet_values(P, (0, 2))
    assert v[0] == 0 and v[7] == 0


@pytest.mark.parametrize("x, expected", [
    ((1, 0), (1, 0, 0, 1, 2, 4, 3, 3)),
    ((2, 3), (2, 4, 3, 3, 1, 0, 0, 1)),
    ((1.5, 1.5), (1.5, 2, 1.5, 2, 1.5, 2, 1.5, 2)),
])
def test_facet_values(x, expected):
    np.testing.assert_allclose(facet_values(P, x), expected, atol=1e-15)


def test_explicit_facet_formulas(rng):
    x, y = rng.uniform(-1, 4, size=(2, 50))
    expected = np.stack([x, x + y - 1, y, -x + y + 2, 3 - x, 5 - x - y, 3 - y, x - y + 2], axis=-1)
    np.testing.assert_allclose(P.facet_values(np.stack([x, y], -1)), expected, atol=1e-13)


def test_affine_dependencies(rng):
    ell = P.facet_values(rng.uniform(-5, 5, size=(200, 2)))
    np.testing.assert_allclose(ell[:, 0] + ell[:, 4], 3)
    np.testing.assert_allclose(ell[:, 2] + ell[:, 6], 3)
    np.testing.assert_allclose(ell[:, 1] + ell[:, 5], 4)
    np.testing.assert_allclose(ell[:, 3] + ell[:, 7], 4)


def test_octagon_is_delzant():
    assert verify_delzant(P)


def test_unit_square_is_delzant():
    assert verify_delzant(DelzantPolygon.from_vertices([(0, 0), (1, 0), (1, 1), (0, 1)]))


def test_thin_triangle_is_not_delzant():
    T = DelzantPolygon.from_vertices([(0, 0), (2, 0), (0, 1)])
    assert sorted(T.normals) == sorted([(0, 1), (1, 0), (-1, -2)])
    assert not verify_delzant(T)
    # the unimodularity defect sits where the hypotenuse meets the y-axis
    assert [(v, abs(d)) for v, d in delzant_defects(T)] == [((0, 1), 2)]


def test_inconsistent_polygon_raises():
    bad = DelzantPolygon(((0, 0), (1, 0), (0, 1)), ((0, 1), (1, 0), (-1, -1)), (0, 0, 5))
    with pytest.raises(MalformedPolygonError):
        verify_delzant(bad)


def test_non_integral_normal_rejected():
    with pytest.raises(MalformedPolygonError):
        DelzantPolygon(((0, 0),), ((0.5, 1),), (0,))


@pytest.mark.parametrize("j, expected", [(0.5, (0.5, 2.5)), (1.5, (0.0, 3.0)), (2.5, (0.5, 2.5))])
def test_slice_range(j, expected):
    np.testing.assert_allclose(slice_range(P, j), expected)


def test_slice_range_outside():
    assert slice_range(P, 4.0) is None
    assert slice_range(P, -0.1) is None


def test_contains_matches_vertex_test(rng):
    x = rng.uniform(-0.5, 3.5, size=(5000, 2))
    np.testing.assert_array_equal(P.contains(x), P.contains_by_vertices(x))


_unimodular = st.sampled_from([
    ((1, 0), (0, 1)), ((0, 1), (1, 0)), ((1, 1), (0, 1)), ((2, 1), (1, 1)),
    ((1, -1), (0, 1)), ((-1, 0), (0, 1)), ((3, 2), (1, 1)), ((1, 2), (0, -1)),
])


@given(_unimodular, st.integers(-3, 3), st.integers(-3, 3))
def test_delzant_invariant_under_lattice_maps(A, bx, by):
    Q = lattice_transform(P, A, (bx, by))
    assert verify_delzant(Q)
    T = DelzantPolygon.from_vertices([(0, 0), (2, 0), (0, 1)])
    assert not verify_delzant(lattice_transform(T, A, (bx, by)))


@given(st.integers(0, 7))
def test_delzant_invariant_under_relabeling(shift):
    verts = list(P.vertices)
    Q = DelzantPolygon.from_vertices(verts[shift:] + verts[:shift])
    assert verify_delzant(Q)
    assert sorted(Q.normals) == sorted(P.normals)


def test_parse_polygon():
    text = "# square\n0 0\n1 0  # corner\n\n1 1\n0 1\n"
    Q = parse_polygon(text)
    assert len(Q.vertices) == 4 and verify_delzant(Q)


def test_parse_polygon_errors():
    with pytest.raises(MalformedPolygonError):
        parse_polygon("0 0\n1\n")
    with pytest.raises(MalformedPolygonError):
        parse_polygon("0 0\n1 x\n0 1\n")
