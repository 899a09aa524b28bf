"""Level sets of the reduced Hamiltonian by marching squares on the sphere.

The sphere ``M_j`` is sampled on a polar grid ``(u, phi)``, with ``u = 0``
and ``u = pi`` the two poles and ``h = h_min + D (1 - cos u) / 2``.  Contours
from :func:`skimage.measure.find_contours` are cut out of small discs around
saddles lying on the level and re-joined across the ``phi`` seam and the
poles by matching endpoints in the R^3 embedding of the sphere.  The result
is a graph per component: saddles are vertices, arcs are edges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from .ambient import TLike
from .errors import ConfigError, DomainError
from .reduced import CriticalPoint, critical_points_on_slice, get_slice

MIN_GRID = 8


@dataclass
class Arc:
    """Chain of contour pieces; ``ends`` are saddle indices or ``None``."""

    points: np.ndarray           # (m, 2) array of (h, phi)
    xyz: np.ndarray              # (m, 3)
    ends: tuple
    closed: bool = False


@dataclass
class LevelComponent:
    arcs: list
    saddles: list = field(default_factory=list)
    extrema: list = field(default_factory=list)
    point: bool = False
    diameter: float = 0.0

    @property
    def polylines(self) -> list[np.ndarray]:
        return [a.points for a in self.arcs]

    @property
    def critical(self) -> list[CriticalPoint]:
        return list(self.saddles) + list(self.extrema)

    @property
    def edges(self) -> list[tuple]:
        return [a.ends for a in self.arcs]


@dataclass
class LevelSet:
    t: np.ndarray
    j: float
    c: float
    grid_n: int
    components: list
    discarded: list
    critical: list
    diagnostics: list

    def __len__(self):
        return len(self.components)

    def to_dict(self) -> dict:
        comps = []
        for k, comp in enumerate(self.components):
            comps.append({
                "id": k,
                "point": comp.point,
                "polylines": [np.round(a.points, 12).tolist() for a in comp.arcs],
                "closed": [bool(a.closed) for a in comp.arcs],
                "arc_ends": [[e if e is None else int(e) for e in a.ends] for a in comp.arcs],
                "critical": [_cp_dict(p) for p in comp.critical],
            })
        return {"t": [float(x) for x in self.t], "j": self.j, "c": self.c, "grid": self.grid_n,
                "components": comps, "discarded": len(self.discarded),
                "diagnostics": list(self.diagnostics)}


def _cp_dict(p: CriticalPoint) -> dict:
    return {"h": p.h, "phi": p.phi, "value": p.value, "kind": p.kind.value,
            "pole": p.pole, "fixed": p.fixed}


def _xyz(u, phi):
    su = np.sin(u)
    return np.stack([su * np.cos(phi), su * np.sin(phi), np.cos(u)], axis=-1)


def _cp_xyz(sl, p: CriticalPoint):
    u = math.acos(max(-1.0, min(1.0, float(sl.z_of_h(p.h)))))
    return _xyz(np.asarray(u), np.asarray(p.phi))


def sphere_grid(t: TLike, j: float, grid_n: int):
    """Values of ``Hbar_t`` on the polar grid with the ``phi = 2 pi`` column repeated."""
    sl = get_slice(t, j)
    u = np.linspace(0.0, math.pi, grid_n)
    phi = np.arange(grid_n + 1) * (2 * math.pi / grid_n)
    h = np.clip(sl.h_of_z(np.cos(u)), sl.lo, sl.hi)
    V = sl.H(h[:, None], phi[None, :])
    return u, phi, V


def level_set(t: TLike, j: float, c: float, grid_n: int = 512, value_tol: float = 1e-9,
              critical: list[CriticalPoint] | None = None) -> LevelSet:
    """Connected components of ``Hbar_t = c`` on ``M_j``.

    Parameters
    ----------
    grid_n : int
        Grid is ``grid_n`` rows in ``u`` by ``grid_n`` columns in ``phi``.
    value_tol : float
        Relative tolerance deciding which critical points lie on the level.
    """
    if grid_n < MIN_GRID:
        raise ConfigError(f"grid_n must be at least {MIN_GRID}")
    if not 0.0 < j < 3.0:
        raise DomainError(f"reduced spheres need 0 < j < 3, got j = {j}")
    sl = get_slice(t, j)
    if critical is None:
        critical = critical_points_on_slice(t, j)
    u, phi, V = sphere_grid(t, j, grid_n)
    du, dphi = math.pi / (grid_n - 1), 2 * math.pi / grid_n
    cell = max(du, dphi)
    r_cut = 3.0 * cell
    r_join = 2.5 * cell

    vtol = value_tol * sl.value_scale
    on_level = [p for p in critical if abs(p.value - c) <= vtol]
    saddles = [p for p in on_level if p.is_saddle]
    extrema = [p for p in on_level if p.is_extremum]
    others = [p for p in on_level if not (p.is_saddle or p.is_extremum)]
    s_xyz = np.array([_cp_xyz(sl, p) for p in saddles]).reshape(-1, 3)
    e_xyz = np.array([_cp_xyz(sl, p) for p in extrema]).reshape(-1, 3)
    boxes = [_cut_box(sl, p, du, dphi, r_cut) for p in saddles]

    diagnostics: list[str] = []
    pieces = []   # [uv (m,2), xyz (m,3), start saddle, stop saddle, closed]
    for cont in measure.find_contours(V, c):
        uu = cont[:, 0] * du
        pp = cont[:, 1] * dphi
        xyz = _xyz(uu, pp)
        closed = len(cont) > 2 and np.allclose(cont[0], cont[-1])
        near = np.zeros(len(cont), dtype=bool)
        which = np.zeros(len(cont), dtype=int)
        for k, box in enumerate(boxes):
            inside = _in_box(box, uu, pp, xyz)
            which[inside & ~near] = k
            near |= inside
        if not near.any():
            pieces.append([np.stack([uu, pp], 1), xyz, None, None, closed])
            continue
        # split into runs of points away from saddles
        idx = np.arange(len(cont))
        if closed and not near[0]:
            # rotate so the run structure starts at a cut
            first = int(np.argmax(near))
            order = np.r_[idx[first:-1], idx[:first + 1]]
        else:
            order = idx
        run = []
        prev_near = None
        for k in order:
            if near[k]:
                if run:
                    pieces.append(_make_piece(uu, pp, xyz, run, start_saddle, int(which[k])))
                    run = []
                prev_near = int(which[k])
            else:
                if not run:
                    start_saddle = prev_near
                run.append(k)
        if run:
            pieces.append(_make_piece(uu, pp, xyz, run, start_saddle, None))

    arcs = _stitch(pieces, r_join, sl, diagnostics)

    # group arcs into components: union over shared saddles
    parent = list(range(len(arcs)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    by_saddle: dict[int, list[int]] = {}
    for k, arc in enumerate(arcs):
        for e in arc.ends:
            if e is not None:
                by_saddle.setdefault(e, []).append(k)
    for s, ks in by_saddle.items():
        for k in ks[1:]:
            parent[find(k)] = find(ks[0])
        if len(ks) != 4:
            diagnostics.append(f"saddle {s} has {len(ks)} arc ends (expected 4)")
    groups: dict[int, list[int]] = {}
    for k in range(len(arcs)):
        groups.setdefault(find(k), []).append(k)

    components, discarded = [], []
    used_extrema = set()
    for ks in groups.values():
        comp_arcs = [arcs[k] for k in ks]
        sidx = sorted({e for a in comp_arcs for e in a.ends if e is not None})
        pts = np.concatenate([a.xyz for a in comp_arcs])
        diam = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
        if not sidx and diam < 2 * cell:
            # tiny loop: an extremum on the level or grid noise
            if len(e_xyz):
                dist = np.linalg.norm(e_xyz - pts.mean(axis=0), axis=1)
                if dist.min() < 4 * cell:
                    used_extrema.add(int(dist.argmin()))
                    continue
            discarded.append(LevelComponent(comp_arcs, diameter=diam))
            continue
        comp = LevelComponent(comp_arcs, [saddles[s] for s in sidx], diameter=diam)
        for p in others:
            if np.linalg.norm(pts - _cp_xyz(sl, p), axis=1).min() < 4 * cell:
                comp.extrema.append(p)
        # renumber saddle ends locally
        local = {s: n for n, s in enumerate(sidx)}
        for a in comp_arcs:
            a.ends = tuple(None if e is None else local[e] for e in a.ends)
        components.append(comp)
    for p in extrema:
        components.append(LevelComponent([], extrema=[p], point=True))
    for k, sad in enumerate(saddles):
        if k not in by_saddle:
            diagnostics.append(f"saddle at h={sad.h:.6g} not reached by any contour")
    if discarded:
        diagnostics.append(f"discarded {len(discarded)} sub-cell contour(s)")
    missed = _missed_extrema(sl, critical, c, vtol, u, phi, V, arcs, cell)
    if missed:
        diagnostics.append(f"{missed} leaf/leaves around extrema below grid resolution")
    components.sort(key=lambda cmp: _sort_key(cmp))
    return LevelSet(np.asarray(sl.t), float(j), float(c), grid_n, components, discarded,
                    critical, diagnostics)


def _missed_extrema(sl, critical, c, vtol, u, phi, V, arcs, cell) -> int:
    """Extrema enclosed by the level although no grid node around them sees it."""
    n = 0
    for p in critical:
        if not p.is_extremum or abs(p.value - c) <= vtol:
            continue
        uu = math.acos(max(-1.0, min(1.0, float(sl.z_of_h(p.h)))))
        iu = int(round(uu / (u[1] - u[0])))
        ip = int(round((p.phi % (2 * math.pi)) / (phi[1] - phi[0]))) % (len(phi) - 1)
        rows = slice(max(iu - 1, 0), iu + 2)
        cols = np.arange(ip - 1, ip + 2) % (len(phi) - 1)
        patch = V[rows][:, cols] if 0 < iu < len(u) - 1 else V[rows]
        if not np.all(np.sign(patch - c) == -np.sign(p.value - c)):
            continue
        pxyz = _cp_xyz(sl, p)
        if any(np.linalg.norm(a.xyz - pxyz, axis=1).min() < 2 * cell for a in arcs):
            continue
        n += 1
    return n


def _cut_box(sl, p: CriticalPoint, du, dphi, r_cut, max_cells=40):
    """Region cut around a saddle, elongated along its flat direction.

    Separatrices leave a saddle with slope ``s = sqrt(|H_phiphi / H_uu|)`` in
    grid coordinates; when ``s`` is small the four branches only separate by a
    grid cell far from the saddle, so the box is stretched in ``phi``.
    """
    u0 = math.acos(max(-1.0, min(1.0, p.z)))
    if min(u0, math.pi - u0) < 12 * du:
        return ("ball", _cp_xyz(sl, p), r_cut)
    s = math.sqrt(abs(p.transverse / p.d2)) if p.d2 else 1.0
    a_phi = min(max(3 * dphi, 3 * du / max(s, 1e-300)), max_cells * dphi)
    a_u = max(3 * du, 2 * s * a_phi)
    return ("box", u0, p.phi, a_u, a_phi)


def _in_box(box, uu, pp, xyz):
    if box[0] == "ball":
        return np.linalg.norm(xyz - box[1], axis=1) < box[2]
    _, u0, p0, a_u, a_phi = box
    dp = np.abs((pp - p0 + math.pi) % (2 * math.pi) - math.pi)
    return (np.abs(uu - u0) <= a_u) & (dp <= a_phi)


def _sort_key(comp: LevelComponent):
    if comp.point:
        return (comp.extrema[0].h, 0.0)
    pts = np.concatenate([a.points for a in comp.arcs])
    return (float(pts[:, 0].min()), float(pts[:, 0].max()))


def _make_piece(uu, pp, xyz, run, start, stop):
    run = np.asarray(run)
    return [np.stack([uu[run], pp[run]], 1), xyz[run], start, stop, False]


def _stitch(pieces, r_join, sl, diagnostics) -> list[Arc]:
    """Join open pieces whose free endpoints coincide on the sphere."""
    arcs: list[Arc] = []
    open_pieces = []
    for uv, xyz, s0, s1, closed in pieces:
        if closed and s0 is None and s1 is None:
            arcs.append(Arc(_to_hphi(sl, uv), xyz, (None, None), closed=True))
        else:
            open_pieces.append([uv, xyz, s0, s1])
    # endpoints: (piece, side)
    ends = []
    for k, (uv, xyz, s0, s1) in enumerate(open_pieces):
        if s0 is None:
            ends.append((k, 0, xyz[0]))
        if s1 is None:
            ends.append((k, 1, xyz[-1]))
    partner: dict[tuple, tuple] = {}
    if ends:
        P = np.array([e[2] for e in ends])
        D = np.linalg.norm(P[:, None] - P[None], axis=-1)
        np.fill_diagonal(D, np.inf)
        for a, b in sorted(zip(*np.nonzero(D < r_join)), key=lambda ab: D[ab[0], ab[1]]):
            ka, kb = (ends[a][0], ends[a][1]), (ends[b][0], ends[b][1])
            if ka in partner or kb in partner or a > b:
                continue
            if ka[0] == kb[0] and len(open_pieces[ka[0]][0]) < 3:
                continue
            partner[ka] = kb
            partner[kb] = ka
    visited = set()
    for k in range(len(open_pieces)):
        if k in visited:
            continue
        # walk to one end of the chain
        start, side = k, 0
        seen = {k}
        while (start, side) in partner:
            nk, nside = partner[(start, side)]
            if nk in seen:
                break
            seen.add(nk)
            start, side = nk, 1 - nside
        chain_uv, chain_xyz = [], []
        cur, entry = start, side
        first_end = _end_saddle(open_pieces[cur], entry)
        closed = False
        while True:
            visited.add(cur)
            uv, xyz = open_pieces[cur][0], open_pieces[cur][1]
            if entry == 1:
                uv, xyz = uv[::-1], xyz[::-1]
            chain_uv.append(uv)
            chain_xyz.append(xyz)
            exit_side = 1 - entry
            nxt = partner.get((cur, exit_side))
            if nxt is None:
                last_end = _end_saddle(open_pieces[cur], exit_side)
                break
            if nxt[0] in visited:
                closed = nxt[0] == start
                last_end = None
                break
            cur, entry = nxt
        uv = np.concatenate(chain_uv)
        xyz = np.concatenate(chain_xyz)
        if not closed and first_end is None and last_end is None and (
                (start, side) not in partner):
            diagnostics.append("unterminated contour arc")
        arcs.append(Arc(_to_hphi(sl, uv), xyz, (first_end, last_end), closed=closed))
    return arcs


def _end_saddle(piece, side):
    return piece[2] if side == 0 else piece[3]


def _to_hphi(sl, uv):
    h = sl.h_of_z(np.cos(uv[:, 0]))
    return np.stack([h, np.mod(uv[:, 1], 2 * math.pi)], axis=1)
