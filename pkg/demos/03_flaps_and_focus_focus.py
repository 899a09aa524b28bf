"""Leaving the toric regime near a vertex: focus-focus points, flaps, swallowtails.

The monomial term ``t1 * gamma1`` competes with ``(1 - 2 t1) H`` at the four
fixed points.  For ``|t1 kappa| > |1 - 2 t1|`` (``kappa = 0.96``) the fixed
point becomes focus-focus and stays inside the image.  Just outside that
window the point stays elliptic-elliptic, but a second sheet of leaves can
appear: a flap.  Elsewhere in parameter space two cusps and a crossing form a
swallowtail.

    python demos/03_flaps_and_focus_focus.py
"""
# %%
from pathlib import Path

from hypersemitoric.bifurcation import find_swallowtails, unfolded_diagram
from hypersemitoric.export import diagram_svg
from hypersemitoric.reduced import classify_pole
from hypersemitoric.scan import pinned_witnesses

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)
W = pinned_witnesses()

# %% Pole types along t1 at the vertex (1, 0).
for t1 in (0.2, 0.33, 0.35, 0.5, 0.9, 0.97):
    print(f"t1 = {t1}: {classify_pole((t1, 0, 0, 0), 1.0, 'lower').value}")

# %% Focus-focus: a marked interior point, still one sheet.
U = unfolded_diagram(W["focus_focus"]["t"], grid=(64, 64))
print("focus-focus markers:", [(f["j"], round(f["value"], 4)) for f in U.features if f["kind"] == "focus-focus"],
      "sheets:", U.n_layers)
(OUT / "focus_focus.svg").write_text(diagram_svg(U, U.critical, title="focus-focus"))

# %% A flap: a second sheet over a thin lens between two cusps.
U = unfolded_diagram(W["flap"]["t"], grid=(96, 96))
flap = max((f for f in U.features if f["kind"] == "flap"), key=lambda f: f["cells"])
print(f"flap: {flap['cells']} cells, {flap['overlap_cells']} over two-leaf cells, j in {flap['j_range']}")
print("cusps:", [(round(c.param, 3), round(c.value, 3)) for c in U.critical.all_cusps()])
(OUT / "flap.svg").write_text(diagram_svg(U, U.critical, title="flap"))

# %% A swallowtail: consecutive cusps whose outer branches cross.
U = unfolded_diagram(W["swallowtail"]["t"], grid=(96, 96))
for cv in U.critical.curves:
    for c1, c2, hit in find_swallowtails(cv):
        print(f"swallowtail between cusps j = {c1.param:.4f} and {c2.param:.4f}, crossing at {hit}")
(OUT / "swallowtail.svg").write_text(diagram_svg(U, U.critical, title="swallowtail"))
