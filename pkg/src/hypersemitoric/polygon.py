"""Rational convex polygons with facet data, and the standard octagon.

A polygon is stored as a list of vertices (counter-clockwise) together with
one facet per edge, ``{x : <x, u_i> >= lam_i}`` with primitive integer inward
normal ``u_i``.  The affine facet functions ``ell_i(x) = <x, u_i> - lam_i`` are
non-negative on the polygon and vanish on facet ``i``.

The octagon facet order is fixed: ``ell_k`` equals ``|z_k|^2 / 2`` on the
ambient model, so every other module indexes facets 1..8 in this order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import MalformedPolygonError

__all__ = [
    "DelzantPolygon",
    "OCTAGON_VERTICES",
    "VERTEX_MODULI",
    "make_octagon",
    "verify_delzant",
    "delzant_defects",
    "facet_values",
    "slice_range",
    "parse_polygon",
    "read_polygon",
]

OCTAGON_VERTICES = ((0, 2), (0, 1), (1, 0), (2, 0), (3, 1), (3, 2), (2, 3), (1, 3))

# (normal, offset) for ell_1 .. ell_8 of the octagon.
_OCTAGON_FACETS = (
    ((1, 0), 0),     # x
    ((1, 1), 1),     # x + y - 1
    ((0, 1), 0),     # y
    ((-1, 1), -2),   # -x + y + 2
    ((-1, 0), -3),   # 3 - x
    ((-1, -1), -5),  # 5 - x - y
    ((0, -1), -3),   # 3 - y
    ((1, -1), -2),   # x - y + 2
)

_S2, _S6 = math.sqrt(2.0), math.sqrt(6.0)

# Moduli |z_k| of the four S^1-fixed points over the vertices on J = 1, 2.
VERTEX_MODULI = {
    (1, 0): (_S2, 0.0, 0.0, _S2, 2.0, 2 * _S2, _S6, _S6),
    (2, 3): (2.0, 2 * _S2, _S6, _S6, _S2, 0.0, 0.0, _S2),
    (1, 3): (_S2, _S6, _S6, 2 * _S2, 2.0, _S2, 0.0, 0.0),
    (2, 0): (2.0, _S2, 0.0, 0.0, _S2, _S6, _S6, 2 * _S2),
}


@dataclass(frozen=True)
class DelzantPolygon:
    """Convex polygon ``{x : <x, u_i> >= lam_i}``.

    Attributes
    ----------
    vertices : tuple of (x, y)
        Counter-clockwise vertices; integers or :class:`fractions.Fraction`.
    normals : tuple of (int, int)
        Inward facet normals, ``normals[i]`` belongs to facet ``i + 1``.
    offsets : tuple
        Offsets ``lam_i``.
    """

    vertices: tuple
    normals: tuple
    offsets: tuple

    def __post_init__(self):
        if len(self.normals) != len(self.offsets):
            raise MalformedPolygonError("normals and offsets differ in length")
        for u in self.normals:
            if not all(isinstance(c, (int, np.integer)) for c in u):
                raise MalformedPolygonError(f"normal {u} is not integral")

    @property
    def n_facets(self) -> int:
        return len(self.normals)

    @property
    def normal_array(self) -> np.ndarray:
        return np.asarray(self.normals, dtype=float)

    @property
    def offset_array(self) -> np.ndarray:
        return np.asarray([float(o) for o in self.offsets])

    def facet_values(self, x) -> np.ndarray:
        """``(ell_1(x), ..., ell_n(x))``; broadcasts over leading axes of ``x``."""
        x = np.asarray(x, dtype=float)
        return x @ self.normal_array.T - self.offset_array

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        return np.all(self.facet_values(x) >= -tol, axis=-1)

    def contains_by_vertices(self, x, tol: float = 0.0) -> np.ndarray:
        """Point-in-polygon from the vertex list alone (edge cross products)."""
        x = np.asarray(x, dtype=float)
        v = np.asarray([[float(a), float(b)] for a, b in self.vertices])
        w = np.roll(v, -1, axis=0)
        edge = w - v
        rel = x[..., None, :] - v
        cross = edge[:, 0] * rel[..., 1] - edge[:, 1] * rel[..., 0]
        scale = np.hypot(edge[:, 0], edge[:, 1])
        return np.all(cross >= -tol * scale, axis=-1)

    def facets_at(self, point, tol: float = 1e-12) -> list[int]:
        """0-based indices of facets whose function vanishes at ``point``."""
        vals = self.facet_values(np.asarray(point, dtype=float))
        return [int(i) for i in np.nonzero(np.abs(vals) <= tol)[0]]

    def slice_range(self, j: float):
        """``(h_min, h_max)`` of the vertical slice ``x = j`` or ``None``."""
        return slice_range(self, j)

    def slice_facets(self, j: float, tol: float = 1e-12):
        """Facet indices (0-based) attaining the lower and upper slice bounds."""
        rng = self.slice_range(j)
        if rng is None:
            return None
        lo, hi = rng
        lower = self.facets_at((j, lo), tol)
        upper = self.facets_at((j, hi), tol)
        return lower, upper

    @classmethod
    def from_vertices(cls, vertices: Sequence[Sequence]) -> "DelzantPolygon":
        """Build facet data from rational vertices (any orientation)."""
        verts = [tuple(Fraction(c) for c in v) for v in vertices]
        if len(verts) < 3:
            raise MalformedPolygonError("need at least 3 vertices")
        area2 = sum(a[0] * b[1] - a[1] * b[0] for a, b in zip(verts, verts[1:] + verts[:1]))
        if area2 == 0:
            raise MalformedPolygonError("degenerate polygon")
        if area2 < 0:
            verts.reverse()
        normals, offsets = [], []
        for a, b in zip(verts, verts[1:] + verts[:1]):
            dx, dy = b[0] - a[0], b[1] - a[1]
            # inward normal of a CCW edge is (-dy, dx); scale to a primitive integer vector
            nx, ny = -dy, dx
            den = math.lcm(nx.denominator, ny.denominator)
            ix, iy = int(nx * den), int(ny * den)
            g = math.gcd(ix, iy)
            ix, iy = ix // g, iy // g
            normals.append((ix, iy))
            offsets.append(ix * a[0] + iy * a[1])
        offsets = [int(o) if o.denominator == 1 else o for o in offsets]
        verts = [tuple(int(c) if c.denominator == 1 else c for c in v) for v in verts]
        poly = cls(tuple(verts), tuple(normals), tuple(offsets))
        _check_consistent(poly)
        return poly


def _check_consistent(P: DelzantPolygon) -> None:
    vals = P.facet_values(np.asarray([[float(a), float(b)] for a, b in P.vertices]))
    if np.any(vals < -1e-12):
        raise MalformedPolygonError("a vertex violates a facet inequality")
    for k, row in enumerate(vals):
        if int(np.sum(np.abs(row) <= 1e-12)) != 2:
            raise MalformedPolygonError(
                f"vertex {P.vertices[k]} lies on {int(np.sum(np.abs(row) <= 1e-12))} facets, expected 2"
            )


def delzant_defects(P: DelzantPolygon) -> list[tuple[tuple, int]]:
    """Vertices where the two facet normals are not a lattice basis, with their determinant."""
    if len(P.vertices) < 3:
        raise MalformedPolygonError("need at least 3 vertices")
    _check_consistent(P)
    bad = []
    for v in P.vertices:
        i, k = P.facets_at([float(v[0]), float(v[1])])
        (a, b), (c, d) = P.normals[i], P.normals[k]
        det = int(a * d - b * c)
        if abs(det) != 1:
            bad.append((v, det))
    return bad


def verify_delzant(P: DelzantPolygon) -> bool:
    """True iff the facet normals at every vertex form a basis of Z^2."""
    return not delzant_defects(P)


def facet_values(P: DelzantPolygon, x) -> np.ndarray:
    return P.facet_values(x)


def slice_range(P: DelzantPolygon, j: float):
    lo, hi = -math.inf, math.inf
    for (ux, uy), lam in zip(P.normals, P.offsets):
        rhs = float(lam) - ux * j
        if uy > 0:
            lo = max(lo, rhs / uy)
        elif uy < 0:
            hi = min(hi, rhs / uy)
        elif rhs > 1e-12:
            return None
    if lo > hi + 1e-12:
        return None
    return (lo, max(lo, hi))


def make_octagon() -> DelzantPolygon:
    """The standard octagon with facets ordered so that ``ell_k = |z_k|^2/2``.

    Raises
    ------
    RuntimeError
        If the facet order fails to reproduce the known fixed-point moduli.
    """
    normals = tuple(u for u, _ in _OCTAGON_FACETS)
    offsets = tuple(lam for _, lam in _OCTAGON_FACETS)
    poly = DelzantPolygon(OCTAGON_VERTICES, normals, offsets)
    _check_consistent(poly)
    for vertex, moduli in VERTEX_MODULI.items():
        expected = 0.5 * np.square(moduli)
        if not np.allclose(poly.facet_values(vertex), expected, atol=1e-12):
            raise RuntimeError(f"octagon facet order does not match moduli at vertex {vertex}")
    return poly


def parse_polygon(text: str) -> DelzantPolygon:
    """Parse ``x y`` vertex lines (``#`` starts a comment)."""
    verts = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise MalformedPolygonError(f"line {lineno}: expected 'x y', got {raw!r}")
        try:
            verts.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise MalformedPolygonError(f"line {lineno}: non-integer coordinate") from exc
    return DelzantPolygon.from_vertices(verts)


def read_polygon(path: str | Path) -> DelzantPolygon:
    return parse_polygon(Path(path).read_text())


def lattice_transform(P: DelzantPolygon, A: Iterable[Iterable[int]], b=(0, 0)) -> DelzantPolygon:
    """Image of ``P`` under ``x -> A x + b`` with ``A`` in GL(2, Z)."""
    A = np.asarray(A, dtype=int)
    det = int(round(np.linalg.det(A)))
    if abs(det) != 1:
        raise ValueError("matrix is not unimodular")
    verts = [tuple(int(c) for c in A @ np.asarray(v) + np.asarray(b)) for v in P.vertices]
    return DelzantPolygon.from_vertices(verts)


def sample_interior(P: DelzantPolygon, rng: np.random.Generator, n: int, margin: float = 1e-3) -> np.ndarray:
    """``n`` uniform points with every facet function above ``margin`` (rejection sampling)."""
    V = np.asarray(P.vertices, float)
    lo, hi = V.min(axis=0), V.max(axis=0)
    out = []
    while len(out) < n:
        x = rng.uniform(lo, hi, size=(4 * n, 2))
        out.extend(x[np.all(P.facet_values(x) > margin, axis=-1)])
    return np.asarray(out[:n])
