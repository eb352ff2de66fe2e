"""The ordered-pebble process and its two-pebble chain.

W_alt keeps a fixed number of pebbles: at a crowded vertex the two
lowest-order pebbles move freely and the others copy one of them. Its cover
time dominates the cobra walk's. Tracking just two pebbles gives a Markov
chain on vertex pairs whose stationary law puts double weight on
co-located pairs. On bipartite graphs that chain cannot mix, and the last
section shows why.
"""
from __future__ import annotations

import numpy as np

from cobra_lab.graphs import generate
from cobra_lab.oracle import exact_stationary
from cobra_lab.walt import (dominance_trial, epoch_length, tensor_pair_chain, tensor_pair_walk,
                            tensor_stationary)

# %% Cover times: cobra against W_alt from the same start
for spec in (("cycle", dict(n=8)), ("complete", dict(n=5)), ("petersen", {})):
    g = generate(spec[0], **spec[1])
    cobra, walt = dominance_trial(g, 0, 3000, seed=5)
    print(f"{g.name:10s} cobra {cobra.mean:6.2f}   W_alt {walt.mean:6.2f}")

# %% The pair chain on an odd cycle matches the closed form
c7 = generate("cycle", n=7)
pi = exact_stationary(tensor_pair_chain(c7)).reshape(7, 7)
print("\nC7 exact stationary, diagonal:", np.round(pi[0, 0] * 56, 6), "/56",
      " off-diagonal:", np.round(pi[0, 1] * 56, 6), "/56")
occ = tensor_pair_walk(c7, 400, 50_000, seed=1)
tv = 0.5 * np.abs(occ.per_state - tensor_stationary(7)).sum()
print(f"simulated after 400 steps: TV {tv:.4f}, diagonal mass {occ.diag_mass:.4f} vs {2 / 8:.4f}")

# %% On C6 the parity of i + j never changes
c6 = generate("cycle", n=6)
s = epoch_length(1 / 3, 2, 6)
occ = tensor_pair_walk(c6, 2000, 50_000, seed=2)
odd = np.add.outer(np.arange(6), np.arange(6)) % 2 == 1
tv = 0.5 * np.abs(occ.per_state - tensor_stationary(6)).sum()
print(f"\nC6: epoch length {s}; mass on odd-parity pairs {occ.per_state[odd].sum():.3f} "
      f"(stationary law puts {tensor_stationary(6)[odd].sum():.3f} there); TV {tv:.3f}")
