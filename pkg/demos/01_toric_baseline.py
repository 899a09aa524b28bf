"""Unperturbed system: the bifurcation diagram is the octagon boundary.

Run from the repository root::

    python demos/01_toric_baseline.py

Writes ``demos/out/toric.svg``.
"""
# %%
from pathlib import Path

import numpy as np

from hypersemitoric import ambient
from hypersemitoric.bifurcation import critical_value_curves, unfolded_diagram
from hypersemitoric.export import diagram_svg
from hypersemitoric.reduced import critical_points_on_slice, level_intervals

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)
t0 = (0.0, 0.0, 0.0, 0.0)

# %% The four fixed points over the vertices on J = 1, 2 have rank zero for any t.
for v, z in ambient.fixed_point_representatives().items():
    obs = ambient.eval_observables(z)
    print(f"vertex {v}: (J, H) = ({obs.J:.12g}, {obs.H:.12g}), rank = {ambient.dFt_rank(z, (0.3, -1, 2, 0.5))}")

# %% On each reduced sphere the height h is a Morse function with two poles.
for j in (0.5, 1.5, 2.5):
    crit = critical_points_on_slice(t0, j)
    print(f"j = {j}: critical values {[round(p.value, 6) for p in crit]}")

# %% Every regular value has a single leaf.
rng = np.random.default_rng(0)
counts = {len(level_intervals(t0, j, rng.uniform(0.1, 2.9))) for j in rng.uniform(1.01, 1.99, 200)}
print("leaf counts seen:", counts)

# %% The critical values trace the polygon boundary; the unfolded diagram has one sheet.
D = critical_value_curves(t0, n_sigma=256)
U = unfolded_diagram(t0, grid=(64, 64), with_curves=False)
print(f"{len(D.curves)} curve pieces, {len(D.all_cusps())} cusps, {U.n_layers} sheet(s)")
(OUT / "toric.svg").write_text(diagram_svg(U, D, title="t = 0"))
