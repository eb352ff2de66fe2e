"""A first look at the 2-cobra walk.

Every active vertex sends two pebbles to uniformly chosen neighbours; pebbles
that land together merge. We compare simulated hitting and cover times with
the exact values from the subset-chain oracle, then look at how much faster
branching is than a plain random walk.

Run with ``python3 demos/01_cobra_basics.py``.
"""
from __future__ import annotations

import numpy as np

from cobra_lab.graphs import generate
from cobra_lab.harness import run_trials
from cobra_lab.oracle import exact_cobra_cover, exact_cobra_hitting, exact_hitting, srw_chain
from cobra_lab.walks import ActiveSet, cobra_step
from cobra_lab.seeding import make_rng

# %% One round by hand on the Petersen graph
g = generate("petersen")
rng = make_rng(7)
s = ActiveSet.of([0])
for _ in range(4):
    s = cobra_step(g, s, rng)
    print(f"round {s.round}: active {s.members()}")

# %% Simulation against the oracle
p3 = generate("path", n=3)
sim = run_trials(p3, "cobra:k=2", "hit:0,2", 50_000, master_seed=1)
print(f"\nP3 hitting 0->2: simulated {sim.mean:.4f} +- {sim.stderr:.4f}, "
      f"exact {exact_cobra_hitting(p3, 0, 2, 2):.4f}")

k3 = generate("complete", n=3)
sim = run_trials(k3, "cobra:k=2", "cover", 50_000, master_seed=2)
print(f"K3 cover: simulated {sim.mean:.4f} +- {sim.stderr:.4f}, exact {exact_cobra_cover(k3, 0, 2):.4f}")

# %% Branching against the simple random walk on cycles
print("\ncycle    SRW H(0, n/2)   2-cobra H(0, n/2)")
for n in (6, 8, 10, 12):
    c = generate("cycle", n=n)
    srw = exact_hitting(srw_chain(c), [n // 2])[0]
    cob = exact_cobra_hitting(c, 0, n // 2, 2)
    print(f"C{n:<7} {srw:12.2f}   {cob:14.2f}")

# %% Tail of the cover-time distribution on a larger graph
grid = generate("grid", d=2, side=20)
stats = run_trials(grid, "cobra:k=2", "cover:0", 300, master_seed=3)
print(f"\n21x21 grid cover: mean {stats.mean:.1f}, p50 {stats.p50:.0f}, "
      f"p90 {stats.p90:.0f}, p99 {stats.p99:.0f}, max {stats.max:.0f}")
print("samples are concentrated:", np.round(np.std(stats.samples) / stats.mean, 3), "relative spread")
