"""Cover-time scaling on grids, expanders and stars.

Three families, three growth laws: linear in the side length on the 2-d grid,
polylogarithmic on random 3-regular graphs, and about n ln n on the star.
Each section fits a line after the matching transform. Sizes are small so
the script finishes in well under a minute; the acceptance suite runs the
full sweeps.
"""
from __future__ import annotations

import math

from cobra_lab.graphs import generate, spectral_gap
from cobra_lab.harness import run_trials
from cobra_lab.seeding import trial_seed
from cobra_lab.stats import fit_scaling
from cobra_lab.walt import conductance_cover_envelope

SEED = 11

# %% Grid: cover ~ side
pts = []
for side in (8, 16, 32, 64):
    s = run_trials(generate("grid", d=2, side=side), "cobra:k=2", "cover:0", 60,
                   trial_seed(SEED, side))
    pts.append((side, s.mean))
    print(f"grid side {side:3d}: cover {s.mean:7.1f}")
fit = fit_scaling(pts, "log-log")
print(f"log-log slope {fit.slope:.3f} (r2 {fit.r_squared:.4f})\n")

# %% Random 3-regular: cover ~ ln^2 n, far inside the conductance envelope
pts = []
for n in (128, 256, 512, 1024, 2048):
    g = generate("random-regular", n=n, d=3, seed=0)
    s = run_trials(g, "cobra:k=2", "cover:0", 60, trial_seed(SEED, n))
    env = conductance_cover_envelope(spectral_gap(g), 3, n)
    pts.append((n, s.mean))
    print(f"n={n:5d}: cover {s.mean:6.2f}, envelope {env:.3g}")
fit = fit_scaling(pts, "value-vs-log2")
print(f"cover vs ln^2 n: slope {fit.slope:.3f}, r2 {fit.r_squared:.4f}\n")

# %% Star: the centre is a bottleneck, cover ~ n ln n
for n in (32, 128, 512):
    s = run_trials(generate("star", n=n), "cobra:k=2", "cover:0", 300, trial_seed(SEED, 7 * n))
    print(f"star n={n:4d}: cover/(n ln n) = {s.mean / (n * math.log(n)):.3f}")
