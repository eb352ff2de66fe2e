"""Biased walks and the hitting-time bounds built on them.

A cobra walk activates a neighbour with probability 1 - (1 - 1/d)^2, which
beats a walk that is biased toward the target with probability 1/d. The
Metropolis construction below produces such a biased walk explicitly, and
its hitting times sit between the cobra walk's and the path-sum bound.
"""
from __future__ import annotations

import numpy as np

from cobra_lab.biased import (activation_probability, azar_bound,
                              best_deterministic_controller_mass, build_metropolis_controller,
                              inverse_bound, path_sum_bound, regular_bound)
from cobra_lab.graphs import generate
from cobra_lab.oracle import exact_cobra_hitting, exact_hitting, return_times

# %% Activation probability against the inverse-degree floor
for d in (1, 2, 3, 10):
    pstar, floor = activation_probability(d)
    print(f"degree {d:2d}: two-draw activation {pstar:.4f} >= biased-walk floor {floor:.4f}")

# %% The Metropolis chain toward vertex 4 of the Petersen graph
g = generate("petersen")
v = 4
ch = build_metropolis_controller(g, [v])
print("\nrow of P at a neighbour of v:", np.round(ch.matrix[g.neighbors(v)[0]], 3))
print(f"return time to v: {return_times(ch.chain())[v]:.3f} "
      f"(bound {inverse_bound(g, v).value:.3f})")

# %% The hitting chain: cobra <= Metropolis <= path-sum bound
hp = exact_hitting(ch.chain(), [v])
print("\n u   cobra H   Metropolis H   path-sum")
for u in (0, 1, 7):
    print(f"{u:2d} {exact_cobra_hitting(g, u, v, 2):9.3f} {hp[u]:14.3f} "
          f"{path_sum_bound(g, u, v).value:10.2f}")

# %% Stationary mass under an eps-biased controller
c6 = generate("cycle", n=6)
for eps in (0.2, 0.5, 0.8):
    best, ctrl = best_deterministic_controller_mass(c6, [0], eps)
    print(f"eps={eps}: best controller mass {best:.4f} >= lower bound {azar_bound(c6, [0], eps).value:.4f}")

# %% Regular graphs: the tree-shaped worst case
rep = regular_bound(10_000, 3)
print(f"\n3-regular, n=10^4: L = {rep.extra['L']:.2f}, return bound {rep.extra['return_bound']:.1f}")
