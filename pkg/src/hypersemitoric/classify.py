"""Topological invariants of leaves: stack counts, period labels, bouquets.

A leaf of ``F_t`` over a regular-orbit value ``(j, c)`` is a J-circle bundle
over one component of ``Hbar_t = c`` on ``M_j``.  In the reduced picture the
component is a graph: saddles are crossings, arcs are edges.  A chain of
``k`` circles glued at ``k - 1`` crossings lifts to a ``k``-stacked torus, so
the stack count is the first Betti number ``E - V + 1`` of that graph.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .ambient import TLike
from .levelset import LevelComponent, LevelSet, level_set
from .polygon import DelzantPolygon, make_octagon
from .reduced import CriticalType, LeafInterval, PoleType, get_slice, level_intervals

_OCTAGON = make_octagon()


class LeafKind(str, enum.Enum):
    REGULAR_TORUS = "regular-torus"
    STACKED_TORUS = "stacked-torus"
    CONTAINS_RANK_ZERO = "contains-rank-zero"
    POINT_LEAF = "point-leaf"
    UNCLASSIFIED = "unclassified"


class UnclassifiedLeaf(ValueError):
    """Leaf carries a degenerate critical point; no stack count is assigned."""


# -- period labels ------------------------------------------------------------

def stabilizer_order(normals, generator=(1, 0)) -> int:
    """Order of the subgroup of the ``generator`` circle fixing a toric stratum.

    ``normals`` are the primitive inward normals of the facets containing the
    stratum; the torus stabilizer is the subtorus they span.  Returns 0 when
    the whole circle fixes the stratum.
    """
    normals = [tuple(int(c) for c in u) for u in normals]
    gx, gy = generator
    if not normals:
        return 1
    if len(normals) >= 2:
        (a, b), (c, d) = normals[:2]
        if a * d - b * c != 0:
            return 0
    ux, uy = normals[0]
    # s * g lies in R u + Z^2  <=>  s * (g x u) is an integer
    cross = gx * uy - gy * ux
    return 0 if cross == 0 else abs(cross)


def stabilizer_order_brute(normals, generator=(1, 0), max_order: int = 64) -> int:
    """Brute-force count of ``s = m / L`` whose rotation fixes the stratum."""
    normals = [tuple(int(c) for c in u) for u in normals]
    if not normals:
        return 1
    if len(normals) >= 2:
        return 0 if normals[0][0] * normals[1][1] - normals[0][1] * normals[1][0] else stabilizer_order(normals[:1], generator)
    ux, uy = normals[0]
    gx, gy = generator
    L = math.lcm(*range(1, max_order + 1))
    count = 0
    for m in range(L):
        s = m / L
        # is s*g - theta*u in Z^2 for some theta?  Scan lattice translates k.
        hit = False
        for kx in range(-abs(ux) - 1, abs(ux) + 2):
            for ky in range(-abs(uy) - 1, abs(uy) + 2):
                vx, vy = s * gx - kx, s * gy - ky
                if abs(vx * uy - vy * ux) < 1e-12:
                    hit = True
                    break
            if hit:
                break
        count += hit
    return 0 if count == L else count


def period_label(t: TLike, j: float, h: float, phi: float = 0.0,
                 polygon: DelzantPolygon | None = None, tol: float = 1e-9) -> int:
    """Isotropy order of the J-orbit over ``(j, h)``; 1 on free orbits, 0 at fixed points.

    The label depends only on which moduli vanish, so ``t`` and ``phi`` are
    accepted for interface uniformity.
    """
    P = _OCTAGON if polygon is None else polygon
    active = P.facets_at((j, h), tol)
    return stabilizer_order([P.normals[i] for i in active])


# -- bouquet graphs -------------------------------------------------------------

@dataclass
class BouquetGraph:
    """Crossings and marked points as vertices; arcs as edges.

    ``edges`` are ``(from, to, label)``; ``from``/``to`` are ``None`` for a
    vertex-free loop.
    """

    vertices: list = field(default_factory=list)   # [(id, label, kind)]
    edges: list = field(default_factory=list)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def betti1(self) -> int:
        if not self.vertices:
            return len(self.edges)
        return self.n_edges - self.n_vertices + nx.number_connected_components(self.to_networkx())

    def to_networkx(self) -> nx.MultiGraph:
        G = nx.MultiGraph()
        for vid, label, kind in self.vertices:
            G.add_node(vid, label=label, kind=kind)
        for k, (a, b, label) in enumerate(self.edges):
            if a is None:
                node = f"loop{k}"
                G.add_node(node, label=None, kind="virtual")
                G.add_edge(node, node, label=label)
            else:
                G.add_edge(a, b, label=label)
        return G

    def isomorphic(self, other: "BouquetGraph") -> bool:
        nm = nx.algorithms.isomorphism.categorical_node_match(["label", "kind"], [None, None])
        em = nx.algorithms.isomorphism.categorical_multiedge_match("label", None)
        return nx.is_isomorphic(self.to_networkx(), other.to_networkx(), node_match=nm, edge_match=em)

    def is_chain(self) -> bool:
        """Crossings in a path, consecutive ones joined by two arcs, loops at the ends."""
        saddles = [v[0] for v in self.vertices if v[2] == "saddle"]
        if len(saddles) != len(self.vertices):
            return False
        if not saddles:
            return len(self.edges) == 1
        G = nx.Graph()
        G.add_nodes_from(saddles)
        mult: dict = {}
        loops: dict = {}
        for a, b, _ in self.edges:
            if a == b:
                loops[a] = loops.get(a, 0) + 1
            else:
                key = frozenset((a, b))
                mult[key] = mult.get(key, 0) + 1
                G.add_edge(a, b)
        if not nx.is_connected(G) or any(m != 2 for m in mult.values()):
            return False
        if len(saddles) == 1:
            return loops.get(saddles[0], 0) == 2
        degs = dict(G.degree())
        if sorted(degs.values()) != [1, 1] + [2] * (len(saddles) - 2):
            return False
        return all(loops.get(v, 0) == (1 if degs[v] == 1 else 0) for v in saddles)

    def to_dict(self, component_ref=None) -> dict:
        out = {
            "nodes": [{"id": vid, "label": label, "kind": kind} for vid, label, kind in self.vertices],
            "edges": [{"from": a, "to": b, "label": label} for a, b, label in self.edges],
        }
        if component_ref is not None:
            out["component"] = component_ref
        return out


def saddle_monodromy(label: int) -> tuple:
    """Permutation of the four separatrix prongs after one J-period.

    A hyperbolic orbit with even isotropy order is traversed with the
    half-turn ``-1`` on its normal slice, which swaps opposite prongs.
    """
    return (2, 3, 0, 1) if label > 0 and label % 2 == 0 else (0, 1, 2, 3)


def is_twisted(graph: BouquetGraph) -> bool:
    """True if some crossing has non-trivial monodromy (a twisted stacked torus)."""
    return any(saddle_monodromy(label) != (0, 1, 2, 3)
               for _, label, kind in graph.vertices if kind == "saddle")


def _split_at_markers(comp: LevelComponent, markers):
    """Arcs with marked points inserted as vertices (by nearest sample)."""
    arcs = [(a.points, list(a.ends), a.closed) for a in comp.arcs]
    out = []
    for pts, ends, closed in arcs:
        cuts = []
        width = max(float(np.ptp(pts[:, 0])), 1e-12)
        for mid, p in markers:
            k = int(np.argmin(np.abs(pts[:, 0] - p.h)))
            if abs(pts[k, 0] - p.h) < 0.05 * width:
                cuts.append((k, mid))
        if not cuts:
            out.append((pts, ends[0], ends[1]))
            continue
        cuts.sort()
        if closed and ends == [None, None]:
            # a loop through markers: arcs between consecutive markers
            for (k0, m0), (k1, m1) in zip(cuts, cuts[1:] + cuts[:1]):
                seg = pts[k0:k1 + 1] if k1 > k0 else np.concatenate([pts[k0:], pts[:k1 + 1]])
                out.append((seg, m0, m1))
        else:
            prev_k, prev_end = 0, ends[0]
            for k, m in cuts:
                out.append((pts[prev_k:k + 1], prev_end, m))
                prev_k, prev_end = k, m
            out.append((pts[prev_k:], prev_end, ends[1]))
    return out


def bouquet(t: TLike, component: LevelComponent, j: float) -> BouquetGraph:
    """Bouquet graph of one level-set component on ``M_j``."""
    if any(p.kind is CriticalType.DEGENERATE or p.kind is PoleType.DEGENERATE
           for p in component.critical):
        raise UnclassifiedLeaf("degenerate critical point on component")
    g = BouquetGraph()
    if component.point:
        p = component.extrema[0]
        g.vertices.append(("p0", period_label(t, j, p.h, p.phi), "point"))
        return g
    for k, s in enumerate(component.saddles):
        g.vertices.append((f"s{k}", period_label(t, j, s.h, s.phi), "saddle"))
    markers = []
    for k, p in enumerate(q for q in component.extrema if q.fixed or q.pole):
        lab = period_label(t, j, p.h, p.phi)
        if lab != 1:
            vid = f"m{k}"
            g.vertices.append((vid, lab, "marked"))
            markers.append((vid, p))
    for pts, a, b in _split_at_markers(component, markers):
        mid = pts[len(pts) // 2]
        lab = period_label(t, j, float(mid[0]), float(mid[1]))
        ida = a if isinstance(a, str) or a is None else f"s{a}"
        idb = b if isinstance(b, str) or b is None else f"s{b}"
        if ida is None and idb is not None:
            ida = idb
        if idb is None and ida is not None:
            idb = ida
        g.edges.append((ida, idb, lab))
    return g


def bouquet_from_interval(t: TLike, leaf: LeafInterval, j: float) -> BouquetGraph:
    """Bouquet of a chain leaf from the exact disc picture (independent of the grid).

    Each Z-interval between consecutive junctions is one circle; its two ends
    are saddles, marked poles or smooth folds, and it contributes one arc per
    pair of consecutive vertices met while going around it.
    """
    g = BouquetGraph()
    sl = get_slice(t, j)
    if leaf.point:
        g.vertices.append(("p0", period_label(t, j, leaf.h_lo), "point"))
        return g
    js = sorted(leaf.junctions, key=lambda p: p.z)
    for k, s in enumerate(js):
        g.vertices.append((f"s{k}", period_label(t, j, s.h, s.phi), "saddle"))
    ends = {}
    for z, name in ((leaf.z_lo, "lo"), (leaf.z_hi, "hi")):
        if abs(abs(z) - 1.0) < 1e-12:
            lab = period_label(t, j, float(sl.h_of_z(z)))
            if lab != 1:
                vid = f"m{len(ends)}"
                g.vertices.append((vid, lab, "marked"))
                ends[name] = vid
    zs = [leaf.z_lo] + [s.z for s in js] + [leaf.z_hi]
    nodes = [ends.get("lo")] + [f"s{k}" for k in range(len(js))] + [ends.get("hi")]
    for k in range(len(zs) - 1):
        lab = period_label(t, j, float(sl.h_of_z(0.5 * (zs[k] + zs[k + 1]))))
        a, b = nodes[k], nodes[k + 1]
        if a is None and b is None:
            g.edges.append((None, None, lab))
        elif a is None or b is None:
            v = a if a is not None else b
            g.edges.append((v, v, lab))
        else:
            g.edges.append((a, b, lab))
            g.edges.append((a, b, lab))
    return g


# -- leaf descriptors -------------------------------------------------------------

@dataclass
class LeafDescriptor:
    j: float
    c: float
    component_id: int
    kind: LeafKind
    k: int | None
    bouquet: BouquetGraph | None
    component: LevelComponent | None = None
    twisted: bool = False

    def to_dict(self) -> dict:
        return {"j": self.j, "c": self.c, "id": self.component_id, "kind": self.kind.value,
                "stack_count": self.k,
                "bouquet": None if self.bouquet is None else self.bouquet.to_dict(self.component_id),
                "twisted": self.twisted}


def stack_count(component) -> int:
    """Number of tori in the stacked torus over a component.

    Accepts a :class:`LevelComponent` (arc graph, ``E - V + 1``) or a
    :class:`LeafInterval` (``1 + #junctions``).
    """
    if isinstance(component, LeafInterval):
        if component.point:
            return 0
        return component.stack
    crit = component.critical
    if any(p.kind in (CriticalType.DEGENERATE, PoleType.DEGENERATE) for p in crit):
        raise UnclassifiedLeaf("degenerate critical point on component")
    if component.point:
        return 0
    if not component.saddles:
        return 1
    return len(component.arcs) - len(component.saddles) + 1


def describe(t: TLike, j: float, c: float, cid: int, comp: LevelComponent) -> LeafDescriptor:
    if comp.point:
        g = bouquet(t, comp, j)
        return LeafDescriptor(j, c, cid, LeafKind.POINT_LEAF, 0, g, comp)
    try:
        k = stack_count(comp)
        g = bouquet(t, comp, j)
    except UnclassifiedLeaf:
        return LeafDescriptor(j, c, cid, LeafKind.UNCLASSIFIED, None, None, comp)
    if any(p.fixed for p in comp.extrema):
        kind = LeafKind.CONTAINS_RANK_ZERO
    elif comp.saddles:
        kind = LeafKind.STACKED_TORUS
    elif comp.critical:
        kind = LeafKind.UNCLASSIFIED
    else:
        kind = LeafKind.REGULAR_TORUS
    return LeafDescriptor(j, c, cid, kind, k, g, comp, twisted=is_twisted(g))


def leaf_components(t: TLike, j: float, c: float, grid_n: int = 512,
                    levels: LevelSet | None = None) -> tuple[int, list[LeafDescriptor]]:
    """Leaves over ``(j, c)`` from the marching-squares level set."""
    if levels is None:
        levels = level_set(t, j, c, grid_n)
    out = [describe(t, j, c, k, comp) for k, comp in enumerate(levels.components)]
    return len(out), out


def leaf_components_exact(t: TLike, j: float, c: float) -> tuple[int, list[LeafDescriptor]]:
    """Leaves over ``(j, c)`` from the exact disc picture."""
    out = []
    for k, leaf in enumerate(level_intervals(t, j, c)):
        g = bouquet_from_interval(t, leaf, j)
        if leaf.point:
            kind, kk = LeafKind.POINT_LEAF, 0
        elif any(_fixed_pole_on(sl, leaf, c) for sl in [get_slice(t, j)]):
            kind, kk = LeafKind.CONTAINS_RANK_ZERO, leaf.stack
        elif leaf.junctions:
            kind, kk = LeafKind.STACKED_TORUS, leaf.stack
        else:
            kind, kk = LeafKind.REGULAR_TORUS, 1
        out.append(LeafDescriptor(j, c, k, kind, kk, g, twisted=is_twisted(g)))
    return len(out), out


def _fixed_pole_on(sl, leaf: LeafInterval, c: float, tol: float = 1e-9) -> bool:
    for which, z in (("lower", 1.0), ("upper", -1.0)):
        if sl.pole_is_fixed(which) and abs(sl.pole_value(which) - c) <= tol * sl.value_scale:
            if leaf.z_lo - 1e-9 <= z <= leaf.z_hi + 1e-9:
                return True
    return False


def same_leaf_structure(a: list[LeafDescriptor], b: list[LeafDescriptor]) -> bool:
    """Multiset equality of leaves by kind, stack count and bouquet isomorphism."""
    if len(a) != len(b):
        return False
    left = list(b)
    for d in a:
        for k, e in enumerate(left):
            if d.kind == e.kind and d.k == e.k and (
                    d.bouquet is None and e.bouquet is None
                    or d.bouquet is not None and e.bouquet is not None and d.bouquet.isomorphic(e.bouquet)):
                del left[k]
                break
        else:
            return False
    return True
