"""SVG, JSON and CSV writers for diagrams, fibers and bouquets.

All writers are pure functions of their input.  The only time-dependent
output is an optional ``generated`` stamp (a JSON key, a ``#`` line in CSV,
an XML comment on the second line of SVG) which callers drop for
reproducible files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from xml.sax.saxutils import escape

import numpy as np
from skimage import measure

from .bifurcation import CriticalDiagram, UnfoldedDiagram
from .reduced import CriticalType

KIND_COLORS = {
    CriticalType.ELLIPTIC_REGULAR.value: "#1f77b4",
    CriticalType.HYPERBOLIC_REGULAR.value: "#d62728",
    CriticalType.DEGENERATE.value: "#9467bd",
}
LAYER_COLORS = ("#c7c7c7", "#ff7f0e", "#2ca02c", "#17becf", "#e377c2", "#bcbd22", "#8c564b")


def timestamp() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def _num(x):
    """JSON-safe float (``nan``/``inf`` become ``None``)."""
    x = float(x)
    return x if math.isfinite(x) else None


def dumps(obj: dict, stamp: bool = False) -> str:
    if stamp:
        obj = {"generated": timestamp(), **obj}
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False) + "\n"


# -- bifurcation diagrams ------------------------------------------------------------

def curves_rows(crit: CriticalDiagram) -> list[tuple]:
    rows = []
    for n, cv in enumerate(crit.curves):
        rows.extend(cv.to_rows(n))
    return rows


def curves_csv(crit: CriticalDiagram, stamp: bool = False) -> str:
    buf = io.StringIO()
    if stamp:
        buf.write(f"# generated {timestamp()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["curve", "j", "sigma", "value", "kind"])
    for cid, j, s, v, k in curves_rows(crit):
        w.writerow([cid, repr(j), repr(s), repr(v), k])
    return buf.getvalue()


def diagram_dict(diag: UnfoldedDiagram) -> dict:
    out = {
        "t": [float(x) for x in diag.t],
        "j": [float(x) for x in diag.j],
        "c": [float(x) for x in diag.c],
        "counts": diag.count_grid().tolist(),
        "layers": [[[lid for lid, _, _ in cell] for cell in row] for row in diag.cells],
        "layer_sizes": {str(k): int(v) for k, v in sorted(diag.layer_sizes.items())},
        "main_layer": int(diag.main_layer()),
        "features": diag.features,
    }
    if diag.critical is not None:
        out["curves"] = [
            {"j": [_num(x) for x in cv.param], "value": [_num(x) for x in cv.value],
             "kind": [k.value if hasattr(k, "value") else str(k) for k in cv.kinds],
             "cusps": [{"j": c.param, "value": c.value, "flat": c.flat} for c in cv.cusps]}
            for cv in diag.critical.curves
        ]
        out["distinguished"] = [{"j": j, "value": v, "kind": k.value} for j, v, k in diag.critical.distinguished]
    return out


class _Frame:
    """Affine map from data coordinates to an SVG canvas (y up)."""

    def __init__(self, xr, yr, width=640, height=480, margin=40):
        self.xr, self.yr = xr, yr
        self.w, self.h, self.m = width, height, margin

    def __call__(self, x, y):
        sx = (self.w - 2 * self.m) / max(self.xr[1] - self.xr[0], 1e-12)
        sy = (self.h - 2 * self.m) / max(self.yr[1] - self.yr[0], 1e-12)
        return self.m + (x - self.xr[0]) * sx, self.h - self.m - (y - self.yr[0]) * sy

    def path(self, xs, ys) -> str:
        pts = [self(x, y) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
        return " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)


def _svg(frame: _Frame, body: list[str], title: str, stamp: bool) -> str:
    head = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{frame.w}" height="{frame.h}" '
            f'viewBox="0 0 {frame.w} {frame.h}">']
    if stamp:
        head.append(f"<!-- generated {timestamp()} -->")
    head.append(f"<title>{escape(title)}</title>")
    head.append(f'<rect width="{frame.w}" height="{frame.h}" fill="white"/>')
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _axes(frame: _Frame, xlabel: str, ylabel: str) -> list[str]:
    (x0, x1), (y0, y1) = frame.xr, frame.yr
    a, b = frame(x0, y0), frame(x1, y1)
    return [f'<rect x="{a[0]:.2f}" y="{b[1]:.2f}" width="{b[0] - a[0]:.2f}" height="{a[1] - b[1]:.2f}" '
            f'fill="none" stroke="#444" stroke-width="0.5"/>',
            f'<text x="{(a[0] + b[0]) / 2:.2f}" y="{frame.h - 8}" font-size="12" text-anchor="middle">{xlabel}</text>',
            f'<text x="12" y="{(a[1] + b[1]) / 2:.2f}" font-size="12" '
            f'transform="rotate(-90 12 {(a[1] + b[1]) / 2:.2f})" text-anchor="middle">{ylabel}</text>',
            f'<text x="{a[0]:.2f}" y="{a[1] + 14:.2f}" font-size="10">{x0:.3g}</text>',
            f'<text x="{b[0]:.2f}" y="{a[1] + 14:.2f}" font-size="10" text-anchor="end">{x1:.3g}</text>',
            f'<text x="{a[0] - 4:.2f}" y="{a[1]:.2f}" font-size="10" text-anchor="end">{y0:.3g}</text>',
            f'<text x="{a[0] - 4:.2f}" y="{b[1] + 10:.2f}" font-size="10" text-anchor="end">{y1:.3g}</text>']


def _layer_polygons(diag: UnfoldedDiagram, lid: int) -> list[np.ndarray]:
    mask = np.array([[any(l == lid for l, _, _ in cell) for cell in row] for row in diag.cells], float)
    mask = np.pad(mask, 1)
    dj = diag.j[1] - diag.j[0] if len(diag.j) > 1 else 1.0
    dc = diag.c[1] - diag.c[0] if len(diag.c) > 1 else 1.0
    out = []
    for cont in measure.find_contours(mask, 0.5):
        out.append(np.column_stack([diag.j[0] + (cont[:, 0] - 1) * dj, diag.c[0] + (cont[:, 1] - 1) * dc]))
    return out


def diagram_svg(diag: UnfoldedDiagram | None, crit: CriticalDiagram | None, stamp: bool = False,
                title: str = "bifurcation diagram") -> str:
    """Layers as translucent polygons, critical curves colored by type."""
    if diag is not None:
        yr = (float(diag.c[0]), float(diag.c[-1]))
    elif crit is not None and crit.curves:
        P = crit.points()
        pad = 0.05 * max(np.ptp(P[:, 1]), 1e-9)
        yr = (float(P[:, 1].min() - pad), float(P[:, 1].max() + pad))
    else:
        yr = (0.0, 3.0)
    f = _Frame((0.0, 3.0), yr)
    body = _axes(f, "J", "H_t")
    if diag is not None:
        main = diag.main_layer()
        for n, lid in enumerate(sorted(diag.layer_sizes, key=lambda k: (k != main, k))):
            color = LAYER_COLORS[min(n, len(LAYER_COLORS) - 1)]
            for poly in _layer_polygons(diag, lid):
                body.append(f'<polygon class="layer" data-layer="{lid}" points="{f.path(poly[:, 0], poly[:, 1])}" '
                            f'fill="{color}" fill-opacity="0.35" stroke="none"/>')
    if crit is not None:
        for cv in crit.curves:
            # split the polyline wherever the kind changes
            kinds = [k.value if hasattr(k, "value") else str(k) for k in cv.kinds]
            start = 0
            for k in range(1, len(cv) + 1):
                if k == len(cv) or kinds[k] != kinds[start]:
                    sl = slice(start, min(k + 1, len(cv)))
                    color = KIND_COLORS.get(kinds[start], "#7f7f7f")
                    body.append(f'<polyline class="curve" data-kind="{kinds[start]}" '
                                f'points="{f.path(cv.param[sl], cv.value[sl])}" fill="none" '
                                f'stroke="{color}" stroke-width="1.2"/>')
                    start = k
            for cp in cv.cusps:
                x, y = f(cp.param, cp.value)
                body.append(f'<circle class="cusp" cx="{x:.2f}" cy="{y:.2f}" r="3" fill="black"/>')
        for j, v, kind in crit.distinguished:
            x, y = f(j, v)
            shape = "cross" if kind.value.startswith("focus") else "dot"
            if shape == "cross":
                body.append(f'<path class="focus-focus" d="M{x - 4:.2f},{y - 4:.2f} L{x + 4:.2f},{y + 4:.2f} '
                            f'M{x - 4:.2f},{y + 4:.2f} L{x + 4:.2f},{y - 4:.2f}" stroke="black" stroke-width="1.5"/>')
            else:
                body.append(f'<circle class="rank-zero" cx="{x:.2f}" cy="{y:.2f}" r="3" fill="#1f77b4"/>')
    return _svg(f, body, title, stamp)


# -- fibers and bouquets -------------------------------------------------------------

def fiber_dict(levels, leaves) -> dict:
    d = levels.to_dict()
    for comp, desc in zip(d["components"], leaves):
        comp["kind"] = desc.kind.value
        comp["stack_count"] = desc.k
        comp["twisted"] = desc.twisted
    return d


def fiber_csv(levels, stamp: bool = False) -> str:
    buf = io.StringIO()
    if stamp:
        buf.write(f"# generated {timestamp()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["component", "arc", "h", "phi"])
    for k, comp in enumerate(levels.components):
        for a, arc in enumerate(comp.arcs):
            for h, phi in arc.points:
                w.writerow([k, a, repr(float(h)), repr(float(phi))])
    return buf.getvalue()


def fiber_svg(levels, stamp: bool = False) -> str:
    from .reduced import get_slice

    sl = get_slice(levels.t, levels.j)
    f = _Frame((sl.lo, sl.hi), (0.0, 2 * math.pi))
    body = _axes(f, "h", "phi")
    for k, comp in enumerate(levels.components):
        color = LAYER_COLORS[(k + 1) % len(LAYER_COLORS)]
        for arc in comp.arcs:
            pts = np.asarray(arc.points)
            # break at the phi seam so lines do not cross the plot
            cut = np.where(np.abs(np.diff(pts[:, 1])) > math.pi)[0] + 1
            for seg in np.split(pts, cut):
                if len(seg) > 1:
                    body.append(f'<polyline points="{f.path(seg[:, 0], seg[:, 1])}" fill="none" '
                                f'stroke="{color}" stroke-width="1.2"/>')
        for p in comp.saddles:
            x, y = f(p.h, p.phi % (2 * math.pi))
            body.append(f'<circle class="saddle" cx="{x:.2f}" cy="{y:.2f}" r="3" fill="#d62728"/>')
    return _svg(f, body, f"level H_t = {levels.c:.6g} on M_j, j = {levels.j:.6g}", stamp)


def bouquet_svg(graphs: list, stamp: bool = False) -> str:
    """Each graph in its own column; vertices on a vertical line, loops as arcs."""
    n = max(len(graphs), 1)
    f = _Frame((0.0, float(n)), (0.0, 1.0), width=200 * n, height=320)
    body = []
    for g_i, g in enumerate(graphs):
        ids = [v[0] for v in g.vertices] or ["o"]
        pos = {v: f(g_i + 0.5, (k + 1) / (len(ids) + 1)) for k, v in enumerate(ids)}
        seen: dict = {}
        for a, b, lab in g.edges:
            pa, pb = pos.get(a, pos[ids[0]]), pos.get(b, pos[ids[0]])
            m = seen[(a, b)] = seen.get((a, b), -1) + 1
            side = -1 if m % 2 else 1
            if a == b:
                r = 16 + 8 * (m // 2)
                body.append(f'<circle cx="{pa[0] + side * r:.2f}" cy="{pa[1]:.2f}" r="{r}" fill="none" stroke="#333"/>')
            else:
                bulge = side * 30 * (m // 2 + 1)
                body.append(f'<path d="M{pa[0]:.2f},{pa[1]:.2f} Q{pa[0] + bulge:.2f},{(pa[1] + pb[1]) / 2:.2f} '
                            f'{pb[0]:.2f},{pb[1]:.2f}" fill="none" stroke="#333"/>')
            if lab != 1:
                body.append(f'<text x="{pa[0] + 4:.2f}" y="{pa[1] - 4:.2f}" font-size="10">{lab}</text>')
        for v, lab, _ in g.vertices:
            x, y = pos[v]
            body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="black"/>')
            if lab != 1:
                body.append(f'<text x="{x - 10:.2f}" y="{y + 4:.2f}" font-size="10">{lab}</text>')
    return _svg(f, body, "bouquet graphs", stamp)
