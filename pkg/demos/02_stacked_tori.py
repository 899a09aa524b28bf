"""Stacked tori: leaves through several saddles at one common value.

A saddle on the reduced sphere is a hyperbolic circle in M; when k - 1
saddles share a value and sit on one level curve, the leaf is a chain of k
tori.  The pinned witnesses below were found by the coarse parameter scan.

    python demos/02_stacked_tori.py
"""
# %%
from pathlib import Path

from hypersemitoric.classify import leaf_components, leaf_components_exact, same_leaf_structure
from hypersemitoric.export import bouquet_svg, fiber_svg
from hypersemitoric.levelset import level_set
from hypersemitoric.reduced import critical_points_on_slice
from hypersemitoric.scan import pinned_witnesses

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)
W = pinned_witnesses()["stack"]

# %% Saddle values on each witness slice coincide to machine precision.
for k, w in sorted(W.items()):
    sad = [p.value for p in critical_points_on_slice(w["t"], w["j"]) if p.is_saddle]
    near = sorted(sad, key=lambda v: abs(v - w["c"]))[: int(k) - 1]
    print(f"k = {k}: t = {w['t']}, j = {w['j']:.10f}, saddle values at the leaf {near}")

# %% Two independent routes agree on the leaf: marching squares and the exact disc picture.
for k, w in sorted(W.items()):
    _, grid = leaf_components(w["t"], w["j"], w["c"], grid_n=1024)
    _, exact = leaf_components_exact(w["t"], w["j"], w["c"])
    d = max(grid, key=lambda d: d.k)
    print(f"k = {k}: stack count {d.k}, bouquet {d.bouquet.n_vertices} vertices / {d.bouquet.n_edges} edges, "
          f"chain = {d.bouquet.is_chain()}, routes agree = {same_leaf_structure(grid, exact)}")
    (OUT / f"stack{k}_level.svg").write_text(fiber_svg(level_set(w["t"], w["j"], w["c"], grid_n=512)))
    (OUT / f"stack{k}_bouquet.svg").write_text(bouquet_svg([d.bouquet]))
