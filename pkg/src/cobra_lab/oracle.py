"""Exact solves on small instances.

These are the ground truth for the Monte Carlo engines: next-set laws of
the cobra walk, hitting and cover times on the subset chains, and generic
hitting/stationary solves for finite Markov chains.

Subsets are bit masks (bit ``v`` set when vertex ``v`` is in the set).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from math import comb

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .errors import InvalidParams, Reducible, Singular, TooLarge, Unreachable
from .graphs import Graph

__all__ = [
    "FiniteChain",
    "CobraSubsetChain",
    "srw_chain",
    "cobra_transition_distribution",
    "cobra_transition_enumerate",
    "cobra_transition_dense",
    "exact_cobra_hitting",
    "exact_cobra_cover",
    "exact_hitting",
    "exact_stationary",
    "return_times",
    "mask_of",
    "members",
]

ROW_TOL = 1e-12
RESIDUAL_TOL = 1e-8
HITTING_MAX_N = 12
COVER_MAX_N = 8
FOLD_BUDGET = 1 << 20


def mask_of(vertices) -> int:
    m = 0
    for v in vertices:
        m |= 1 << int(v)
    return m


def members(mask: int) -> list[int]:
    out, v = [], 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


@dataclass(frozen=True, eq=False)
class FiniteChain:
    """Row-stochastic transition matrix on states ``0..m-1``."""

    transition: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.transition, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise InvalidParams("transition matrix must be square")
        if np.any(p < 0):
            raise InvalidParams("negative transition probability")
        if np.max(np.abs(p.sum(axis=1) - 1.0)) > ROW_TOL:
            raise InvalidParams("rows must sum to 1")
        object.__setattr__(self, "transition", p)

    @property
    def states(self) -> int:
        return self.transition.shape[0]


def srw_chain(g: Graph) -> FiniteChain:
    p = np.zeros((g.n, g.n))
    for v in range(g.n):
        p[v, g.neighbors(v)] = 1.0 / g.degree(v)
    return FiniteChain(p)


# ---------------------------------------------------------------------------
# cobra next-set laws

def _surjections(k: int, j: int) -> int:
    return sum((-1) ** i * comb(j, i) * (j - i) ** k for i in range(j + 1))


def _vertex_union_law(g: Graph, v: int, k: int) -> dict[int, float]:
    """Law of the set of neighbours hit by k uniform draws from N(v)."""
    nbrs = [int(w) for w in g.neighbors(v)]
    d = len(nbrs)
    out = {}
    for j in range(1, min(k, d) + 1):
        pj = _surjections(k, j) / d ** k
        for sub in combinations(nbrs, j):
            out[mask_of(sub)] = pj
    return out


def cobra_transition_distribution(g: Graph, s: int, k: int,
                                  budget: int = FOLD_BUDGET) -> dict[int, float]:
    """Next active set law from active mask ``s``, folding vertices one at a time."""
    if s == 0:
        raise InvalidParams("active set must be nonempty")
    if k < 1:
        raise InvalidParams("k must be >= 1")
    acc = {0: 1.0}
    for v in members(s):
        law = _vertex_union_law(g, v, k)
        nxt: dict[int, float] = {}
        for a, pa in acc.items():
            for b, pb in law.items():
                u = a | b
                nxt[u] = nxt.get(u, 0.0) + pa * pb
        if len(nxt) > budget:
            raise TooLarge(f"next-set law exceeds {budget} states")
        acc = nxt
    return acc


def cobra_transition_enumerate(g: Graph, s: int, k: int, limit: int = 10 ** 6) -> dict[int, float]:
    """Same law by listing every joint draw; only for tiny cases."""
    verts = members(s)
    choices = []
    total = 1
    for v in verts:
        nb = [int(w) for w in g.neighbors(v)]
        choices.extend([nb] * k)
        total *= len(nb) ** k
    if total > limit:
        raise TooLarge(f"{total} joint draws exceed the enumeration limit {limit}")
    out: dict[int, float] = {}
    w = 1.0 / total
    for draw in product(*choices):
        m = mask_of(draw)
        out[m] = out.get(m, 0.0) + w
    return out


def _popcounts(n: int) -> np.ndarray:
    t = np.arange(1 << n)
    c = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        c += (t >> b) & 1
    return c


class _DenseKernel:
    """Dense next-set laws via the subset (zeta) transform.

    P(next set is contained in T) = prod over active v of (|N(v) & T| / d(v))^k,
    and a Moebius transform over T turns this into the exact point law.
    """

    def __init__(self, g: Graph, k: int):
        if g.n > 16:
            raise TooLarge("dense subset kernel limited to n <= 16")
        self.n = g.n
        self.k = k
        pc = _popcounts(g.n)
        t = np.arange(1 << g.n)
        self.frac = np.empty((g.n, 1 << g.n))
        for v in range(g.n):
            self.frac[v] = pc[t & mask_of(g.neighbors(v))] / g.degree(v)

    def law(self, s: int) -> np.ndarray:
        f = np.ones(1 << self.n)
        for v in members(s):
            f *= self.frac[v] ** self.k
        for b in range(self.n):
            step = 1 << b
            f = f.reshape(-1, 2, step)
            f[:, 1, :] -= f[:, 0, :]
            f = f.reshape(-1)
        f[np.abs(f) < 1e-15] = 0.0
        return f


def cobra_transition_dense(g: Graph, s: int, k: int) -> np.ndarray:
    """Next-set law as a dense array indexed by mask."""
    if s == 0:
        raise InvalidParams("active set must be nonempty")
    return _DenseKernel(g, k).law(s)


@dataclass
class CobraSubsetChain:
    """Reachable part of the cobra subset chain (hitting variant).

    ``states`` lists the masks of the transient states, ``q`` the transient
    block and ``absorb`` the one-step absorption probabilities.
    """

    graph: Graph
    k: int
    states: list[int]
    q: np.ndarray
    absorb: np.ndarray


def _hitting_subset_chain(g: Graph, start: int, target: int, k: int) -> CobraSubsetChain:
    kern = _DenseKernel(g, k)
    tbit = 1 << target
    index = {1 << start: 0}
    order = [1 << start]
    rows = []
    i = 0
    while i < len(order):
        law = kern.law(order[i])
        nz = np.flatnonzero(law)
        rows.append((nz, law[nz]))
        for m in nz:
            m = int(m)
            if not m & tbit and m not in index:
                index[m] = len(order)
                order.append(m)
        i += 1
    size = len(order)
    q = np.zeros((size, size))
    absorb = np.zeros(size)
    for r, (nz, probs) in enumerate(rows):
        if abs(probs.sum() - 1.0) > ROW_TOL:
            raise Singular(f"subset chain row {r} sums to {probs.sum()!r}")
        for m, p in zip(nz.tolist(), probs.tolist()):
            if m & tbit:
                absorb[r] += p
            else:
                q[r, index[m]] += p
    return CobraSubsetChain(g, k, order, q, absorb)


def _solve_absorbing(q: np.ndarray) -> np.ndarray:
    a = np.eye(q.shape[0]) - q
    rhs = np.ones(q.shape[0])
    try:
        h = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise Singular(str(exc)) from None
    resid = np.max(np.abs(a @ h - rhs)) if h.size else 0.0
    if not np.isfinite(resid) or resid > RESIDUAL_TOL:
        raise Singular(f"absorbing solve residual {resid:.3g}")
    return h


def exact_cobra_hitting(g: Graph, start: int, target: int, k: int = 2) -> float:
    """Expected first round at which ``target`` is active (n <= 12)."""
    if g.n > HITTING_MAX_N:
        raise TooLarge(f"exact cobra hitting limited to n <= {HITTING_MAX_N}, got {g.n}")
    if start == target:
        return 0.0
    chain = _hitting_subset_chain(g, start, target, k)
    return float(_solve_absorbing(chain.q)[0])


def exact_cobra_cover(g: Graph, start: int, k: int = 2) -> float:
    """Expected cover time from ``start`` on the (active, visited) chain (n <= 8).

    Visited sets only grow, so the chain is solved one visited set at a time,
    largest first; each block is a dense solve over active sets inside it.
    """
    if g.n > COVER_MAX_N:
        raise TooLarge(f"exact cobra cover limited to n <= {COVER_MAX_N}, got {g.n}")
    full = (1 << g.n) - 1
    if g.n == 1:
        return 0.0
    kern = _DenseKernel(g, k)
    laws = {}

    def law(a):
        if a not in laws:
            laws[a] = kern.law(a)
        return laws[a]

    sbit = 1 << start
    visited_sets = [v for v in range(full) if v & sbit]
    visited_sets.sort(key=lambda v: -bin(v).count("1"))
    h: dict[int, np.ndarray] = {}
    for vis in visited_sets:
        actives = [a for a in range(1, full + 1) if a & vis == a]
        idx = {a: i for i, a in enumerate(actives)}
        q = np.zeros((len(actives), len(actives)))
        rhs = np.ones(len(actives))
        for i, a in enumerate(actives):
            p = law(a)
            for nxt in np.flatnonzero(p).tolist():
                w = p[nxt]
                nv = vis | nxt
                if nv == vis:
                    q[i, idx[nxt]] += w
                elif nv != full:
                    rhs[i] += w * h[nv][nxt]
        sol = np.linalg.solve(np.eye(len(actives)) - q, rhs)
        if np.max(np.abs((np.eye(len(actives)) - q) @ sol - rhs)) > RESIDUAL_TOL * max(1.0, sol.max()):
            raise Singular("cover block solve residual too large")
        table = np.zeros(full + 1)
        table[actives] = sol
        h[vis] = table
    return float(h[sbit][sbit])


# ---------------------------------------------------------------------------
# generic chains

def _support(chain: FiniteChain) -> csr_matrix:
    return csr_matrix(chain.transition > 0)


def exact_hitting(chain: FiniteChain, targets) -> np.ndarray:
    """Expected hitting time of the target set from every state (0 on targets)."""
    targets = sorted({int(t) for t in targets})
    if not targets:
        raise InvalidParams("need at least one target state")
    m = chain.states
    # states that can reach a target: BFS on the reversed support graph
    rev = _support(chain).T.tocsr()
    can = np.zeros(m, dtype=bool)
    for t in targets:
        can[breadth_first_order(rev, t, directed=True, return_predecessors=False)] = True
    if not can.all():
        raise Unreachable(f"states {np.flatnonzero(~can).tolist()} cannot reach the targets")
    transient = np.setdiff1d(np.arange(m), targets)
    h = np.zeros(m)
    if transient.size:
        q = chain.transition[np.ix_(transient, transient)]
        h[transient] = _solve_absorbing(q)
    return h


def return_times(chain: FiniteChain) -> np.ndarray:
    """Expected return time to each state, 1 + sum_j P[i, j] * H(j -> i)."""
    out = np.empty(chain.states)
    for i in range(chain.states):
        out[i] = 1.0 + chain.transition[i] @ exact_hitting(chain, [i])
    return out


def exact_stationary(chain: FiniteChain, verify: bool | None = None) -> np.ndarray:
    """Stationary law of an irreducible chain.

    Solves ``pi (P - I) = 0`` with one equation replaced by normalization.
    With ``verify`` (default for chains of at most 200 states) the return
    times are checked against ``1/pi``.
    """
    m = chain.states
    ncomp, _ = connected_components(_support(chain), directed=True, connection="strong")
    if ncomp != 1:
        raise Reducible(f"chain has {ncomp} strongly connected components")
    a = chain.transition.T - np.eye(m)
    a[-1, :] = 1.0
    b = np.zeros(m)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)
    resid = np.max(np.abs(pi @ chain.transition - pi))
    if resid > 1e-10:
        raise Singular(f"stationary residual {resid:.3g}")
    if verify is None:
        verify = m <= 200
    if verify:
        rt = return_times(chain)
        if np.max(np.abs(rt * pi - 1.0)) > 1e-8:
            raise Singular("return-time identity failed")
    return pi
