from __future__ import annotations

import functools

import networkx as nx
import numpy as np
from hypothesis import strategies as st

from cobra_lab.graphs import Graph


@functools.lru_cache(maxsize=None)
def atlas(max_n: int, min_n: int = 2) -> tuple[Graph, ...]:
    """Every connected graph with min_n <= n <= max_n (max_n <= 7), one per isomorphism class."""
    out = []
    for i, G in enumerate(nx.graph_atlas_g()):
        n = G.number_of_nodes()
        if min_n <= n <= max_n and nx.is_connected(G):
            out.append(Graph.from_edges(n, list(G.edges()), name=f"atlas:{i}"))
    return tuple(out)


def random_connected(n: int, extra: int, seed: int) -> Graph:
    """Random spanning tree plus ``extra`` attempted chords."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    edges = {tuple(sorted((int(order[i]), int(order[rng.integers(i)])))) for i in range(1, n)}
    for _ in range(extra):
        u, v = (int(x) for x in rng.choice(n, 2, replace=False))
        edges.add((min(u, v), max(u, v)))
    return Graph.from_edges(n, sorted(edges), name=f"random:{n},{extra},{seed}")


@st.composite
def connected_graphs(draw, min_n: int = 2, max_n: int = 10):
    n = draw(st.integers(min_n, max_n))
    extra = draw(st.integers(0, n * (n - 1) // 2))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_connected(n, extra, seed)
