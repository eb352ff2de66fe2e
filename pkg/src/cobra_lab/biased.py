"""Biased random walks, the Metropolis controller construction and the
closed-form bound calculators for hitting and return times."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import _kernels as K
from .errors import (BiasViolation, DegenerateSigma, DisconnectedGraph, InvalidParams,
                     Singular, TooLarge)
from .graphs import PATH_CONVENTIONS, Graph, bfs_distances, inverse_degree_paths, shortest_hop_path
from .oracle import FiniteChain, exact_stationary
from .seeding import make_rng
from .walks import default_cap

__all__ = [
    "BiasedChain",
    "BoundReport",
    "sigma_to_set",
    "p_to_vertex",
    "greedy_controller",
    "epsilon_biased_chain",
    "inverse_degree_chain",
    "build_metropolis_controller",
    "run_biased_walk",
    "azar_bound",
    "inverse_bound",
    "regular_bound",
    "path_sum_bound",
    "activation_probability",
    "controller_stationary_masses",
    "best_deterministic_controller_mass",
]

BIAS_TOL = 1e-12
STATIONARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BiasedChain:
    """Transition matrix of a biased walk and its stationary law.

    For chains built by :func:`build_metropolis_controller`, ``matrix`` is
    the zero-diagonal chain P, ``lazy_matrix`` the Metropolis chain M and
    ``target_law`` the distribution M was built for.
    """

    matrix: np.ndarray
    kind: str
    params: dict
    stationary: np.ndarray
    lazy_matrix: np.ndarray | None = None
    target_law: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def chain(self) -> FiniteChain:
        return FiniteChain(self.matrix)


@dataclass(frozen=True)
class BoundReport:
    name: str
    value: float
    inputs: dict
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        # an empty path legitimately sums to 0
        ok = self.value >= 0 if self.name == "path-sum" else self.value > 0
        if not (math.isfinite(self.value) and ok):
            raise InvalidParams(f"{self.name}: bound value {self.value} is not finite and positive")


def _make_chain(g: Graph, p: np.ndarray, kind: str, params: dict, **kw) -> BiasedChain:
    adj = np.zeros((g.n, g.n), dtype=bool)
    for v in range(g.n):
        adj[v, g.neighbors(v)] = True
    np.fill_diagonal(adj, True)
    if np.any(p[~adj] != 0):
        raise InvalidParams("transition support must lie on edges or the diagonal")
    pi = exact_stationary(FiniteChain(p), verify=False)
    resid = np.max(np.abs(pi @ p - pi))
    if resid > STATIONARY_TOL:
        raise Singular(f"stationary residual {resid:.3g}")
    return BiasedChain(p, kind, params, pi, **kw)


def _check_set(g: Graph, S) -> list[int]:
    S = sorted({int(v) for v in S})
    if not S:
        raise InvalidParams("target set must be nonempty")
    if S[0] < 0 or S[-1] >= g.n:
        raise InvalidParams("target vertex out of range")
    if not g.is_connected():
        raise DisconnectedGraph("graph must be connected")
    return S


# Path weights are computed from the target outwards, so the roles of the
# path's two endpoints swap relative to the x -> v orientation.
_REVERSED = {"interior": "interior", "source": "target", "target": "source", "both": "both"}


def sigma_to_set(g: Graph, S, convention: str = "interior") -> np.ndarray:
    """sigma_hat(x, S): min over v in S of the best x -> v path product of
    ``1 - 1/degree``; ``convention`` refers to the x -> v orientation."""
    if convention not in PATH_CONVENTIONS:
        raise InvalidParams(f"convention must be one of {PATH_CONVENTIONS}")
    out = np.ones(g.n)
    for v in S:
        out = np.minimum(out, inverse_degree_paths(g, v, _REVERSED[convention]).sigma_hat)
    return out


def p_to_vertex(g: Graph, v: int, convention: str = "interior") -> np.ndarray:
    """p(x, v) for every x, in the x -> v orientation."""
    if convention not in PATH_CONVENTIONS:
        raise InvalidParams(f"convention must be one of {PATH_CONVENTIONS}")
    return inverse_degree_paths(g, v, _REVERSED[convention]).dist_p


def greedy_controller(g: Graph, S) -> np.ndarray:
    """Per vertex, the smallest-id neighbour nearest (in hops) to S."""
    S = _check_set(g, S)
    dist = np.min([bfs_distances(g, v) for v in S], axis=0)
    ctrl = np.empty(g.n, dtype=np.int64)
    for x in range(g.n):
        nb = g.neighbors(x)
        ctrl[x] = nb[np.argmin(dist[nb])]
    return ctrl


def _uniform_rows(g: Graph) -> np.ndarray:
    p = np.zeros((g.n, g.n))
    for v in range(g.n):
        p[v, g.neighbors(v)] = 1.0 / g.degree(v)
    return p


def _check_controller(g: Graph, controller) -> np.ndarray:
    ctrl = np.asarray(controller, dtype=np.int64)
    if ctrl.shape != (g.n,):
        raise InvalidParams("controller must name one neighbour per vertex")
    for x in range(g.n):
        if ctrl[x] not in g.neighbors(x):
            raise InvalidParams(f"controller choice {ctrl[x]} is not a neighbour of {x}")
    return ctrl


def epsilon_biased_chain(g: Graph, eps: float, controller) -> BiasedChain:
    """With probability 1 - eps a uniform neighbour, else the controller's choice."""
    if not 0 <= eps <= 1:
        raise InvalidParams("eps must lie in [0, 1]")
    ctrl = _check_controller(g, controller)
    p = (1 - eps) * _uniform_rows(g)
    p[np.arange(g.n), ctrl] += eps
    return _make_chain(g, p, "epsilon-biased", {"eps": eps, "controller": ctrl.tolist()})


def inverse_degree_chain(g: Graph, target: int, controller=None) -> BiasedChain:
    """Bias probability 1/d(x) at every x except ``target``, whose row is uniform."""
    S = _check_set(g, [target])
    ctrl = greedy_controller(g, S) if controller is None else _check_controller(g, controller)
    p = _uniform_rows(g)
    for x in range(g.n):
        if x == target:
            continue
        b = 1.0 / g.degree(x)
        p[x] *= 1 - b
        p[x, ctrl[x]] += b
    return _make_chain(g, p, "inverse-degree", {"target": target, "controller": ctrl.tolist()})


def build_metropolis_controller(g: Graph, S, convention: str = "interior") -> BiasedChain:
    """Metropolis chain for the sigma_hat-weighted law and its zero-diagonal version.

    The target law puts mass proportional to d(v) on v in S and to
    sigma_hat(x, S) * d(x) elsewhere. M has off-diagonal entries
    min(1/d(x), pi(y) / (d(y) pi(x))); P removes the holding probability,
    P[x, y] = M[x, y] / (1 - M[x, x]). Every P row outside S is checked to
    give each neighbour at least (1 - 1/d(x)) / d(x).
    """
    S = _check_set(g, S)
    sig = sigma_to_set(g, S, convention)
    inS = np.zeros(g.n, dtype=bool)
    inS[S] = True
    deg = g.degrees.astype(float)
    if np.any(sig[~inS] <= 0):
        bad = np.flatnonzero((sig <= 0) & ~inS).tolist()
        raise DegenerateSigma(f"sigma_hat vanishes at {bad} under the {convention} convention")
    w = np.where(inS, deg, sig * deg)
    pim = w / w.sum()
    m = np.zeros((g.n, g.n))
    for x in range(g.n):
        for y in g.neighbors(x):
            m[x, y] = min(1.0 / deg[x], pim[y] / (deg[y] * pim[x]))
        m[x, x] = max(0.0, 1.0 - m[x].sum())
    stay = np.diag(m).copy()
    p = m.copy()
    np.fill_diagonal(p, 0.0)
    p /= (1.0 - stay)[:, None]
    for x in np.flatnonzero(~inS):
        floor = (1 - 1 / deg[x]) / deg[x]
        nb = g.neighbors(x)
        if np.any(p[x, nb] < floor - BIAS_TOL):
            raise BiasViolation(f"row {x}: min {p[x, nb].min():.6g} below {floor:.6g}")
    return _make_chain(g, p, "metropolis-derived", {"S": S, "convention": convention},
                       lazy_matrix=m, target_law=pim)


def run_biased_walk(chain: BiasedChain, start: int, target: int, cap: int | None = None,
                    seed: int = 0) -> int | None:
    """Hitting time of ``target`` from ``start``; None on timeout."""
    n = chain.n
    if not (0 <= start < n and 0 <= target < n):
        raise InvalidParams("start/target out of range")
    cap = default_cap(n) if cap is None else cap
    indptr = np.zeros(n + 1, dtype=np.int64)
    states, probs = [], []
    for x in range(n):
        nz = np.flatnonzero(chain.matrix[x] > 0)
        states.extend(nz.tolist())
        c = np.cumsum(chain.matrix[x, nz])
        c[-1] = 1.0
        probs.extend(c.tolist())
        indptr[x + 1] = len(states)
    t = K.chain_hit(indptr, np.asarray(states, dtype=np.int64), np.asarray(probs), start,
                    target, cap, make_rng(seed))
    return None if t < 0 else int(t)


# ---------------------------------------------------------------------------
# bound calculators

def azar_bound(g: Graph, S, eps: float) -> BoundReport:
    """Lower bound on the stationary mass at S of an eps-biased walk under a
    good controller: vol(S) / (vol(S) + sum_{x not in S} beta^(dist(x,S)-1) d(x))."""
    if not 0 < eps < 1:
        raise InvalidParams("eps must lie in (0, 1)")
    S = _check_set(g, S)
    beta = 1 - eps
    dist = np.min([bfs_distances(g, v) for v in S], axis=0)
    deg = g.degrees.astype(float)
    inS = dist == 0
    vol_s = deg[inS].sum()
    rest = np.sum(beta ** (dist[~inS] - 1) * deg[~inS])
    return BoundReport("azar", float(vol_s / (vol_s + rest)), {"n": g.n, "S": S, "eps": eps})


def inverse_bound(g: Graph, v: int, convention: str = "interior") -> BoundReport:
    """Return-time bound (d(v) + sum_{x != v} sigma_hat(x, v) d(x)) / d(v).

    ``extra['relaxed']`` replaces sigma_hat by exp(-p(x, v)), which is never smaller.
    """
    S = _check_set(g, [v])
    deg = g.degrees.astype(float)
    others = np.arange(g.n) != v
    sig = sigma_to_set(g, S, convention)
    pv = p_to_vertex(g, v, convention)
    value = (deg[v] + np.sum(sig[others] * deg[others])) / deg[v]
    relaxed = (deg[v] + np.sum(np.exp(-pv[others]) * deg[others])) / deg[v]
    return BoundReport("inverse", float(value), {"n": g.n, "v": v, "convention": convention},
                       {"relaxed": float(relaxed)})


def regular_bound(n: int, delta: int) -> BoundReport:
    """Return-time and hitting envelopes for delta-regular graphs, delta >= 3.

    L solves delta((delta-1)^L - 1)/(delta-2) = n - 1; with beta = 1 - 1/delta
    the return time is at most 1 + n^(1-1/delta) and the hitting envelope is
    2 delta C n^(2-1/delta), C = delta / ((delta-1) beta - 1).
    """
    if delta <= 2:
        raise InvalidParams("delta must be at least 3")
    if n < 2:
        raise InvalidParams("n must be at least 2")
    L = math.log((n - 1) * (delta - 2) / delta + 1, delta - 1)
    beta = 1 - 1 / delta
    c = delta / ((delta - 1) * beta - 1)
    ret = 1 + n ** (1 - 1 / delta)
    env = 2 * delta * c * n ** (2 - 1 / delta)
    return BoundReport("regular", float(env), {"n": n, "delta": delta},
                       {"L": L, "beta": beta, "beta_L": beta ** L, "C": c, "return_bound": ret,
                        "hitting_envelope": env})


def path_sum_bound(g: Graph, u: int, v: int, convention: str = "interior") -> BoundReport:
    """sum_i d(u_i) * R(u_i) over the shortest-hop path u = u_0, ..., u_k = v,
    excluding u_k, with R the return-time bound of :func:`inverse_bound`.

    ``extra['expanded']`` is sum_i (d(u_i) + sum_{x != u_i} d(x) exp(-p(x, u_i))).
    A zero-length path gives 0.
    """
    _check_set(g, [u, v])
    path = shortest_hop_path(g, u, v)[:-1]
    total = 0.0
    expanded = 0.0
    for w in path:
        rep = inverse_bound(g, w, convention)
        d = g.degree(w)
        total += d * rep.value
        expanded += d * rep.extra["relaxed"]
    return BoundReport("path-sum", float(total), {"n": g.n, "u": u, "v": v, "convention": convention},
                       {"expanded": float(expanded), "path": path + [v]})


def activation_probability(deg: int) -> tuple[float, float]:
    """Chance that a vertex of degree ``deg`` with two draws activates a given
    neighbour, 1 - (1 - 1/deg)^2, and the inverse-degree walk's floor
    1/deg + (1 - 1/deg)/deg."""
    if deg < 1:
        raise InvalidParams("degree must be >= 1")
    pstar = 1 - (1 - 1 / deg) ** 2
    floor = 1 / deg + (1 - 1 / deg) / deg
    if pstar < floor - 1e-15:
        raise BiasViolation(f"activation {pstar} below floor {floor} at degree {deg}")
    return pstar, floor


# ---------------------------------------------------------------------------
# exhaustive controller oracle

CONTROLLER_BUDGET = 200_000


def controller_stationary_masses(g: Graph, S, eps: float, controllers: np.ndarray) -> np.ndarray:
    """Stationary mass at S of the eps-biased chain for each row of ``controllers``."""
    S = _check_set(g, S)
    ctrl = np.asarray(controllers, dtype=np.int64)
    b = ctrl.shape[0]
    n = g.n
    base = (1 - eps) * _uniform_rows(g)
    p = np.broadcast_to(base, (b, n, n)).copy()
    p[np.arange(b)[:, None], np.arange(n)[None, :], ctrl] += eps
    a = np.transpose(p, (0, 2, 1)) - np.eye(n)
    a[:, -1, :] = 1.0
    rhs = np.zeros((b, n, 1))
    rhs[:, -1, 0] = 1.0
    pi = np.linalg.solve(a, rhs)[..., 0]
    resid = np.max(np.abs(np.einsum("bi,bij->bj", pi, p) - pi))
    if resid > 1e-9:
        raise Singular(f"batched stationary residual {resid:.3g}")
    return pi[:, S].sum(axis=1)


def best_deterministic_controller_mass(g: Graph, S, eps: float, budget: int = CONTROLLER_BUDGET,
                                       chunk: int = 4096) -> tuple[float, np.ndarray]:
    """Largest stationary mass at S over every deterministic controller
    (one fixed neighbour per vertex), by exhaustive enumeration."""
    if not 0 < eps < 1:
        raise InvalidParams("eps must lie in (0, 1)")
    S = _check_set(g, S)
    total = math.prod(g.degree(v) for v in range(g.n))
    if total > budget:
        raise TooLarge(f"{total} controllers exceed the budget {budget}")
    choices = [g.neighbors(v) for v in range(g.n)]
    best, arg = -1.0, None
    it = product(*choices)
    while True:
        block = [c for _, c in zip(range(chunk), it)]
        if not block:
            break
        arr = np.array(block, dtype=np.int64)
        mass = controller_stationary_masses(g, S, eps, arr)
        i = int(np.argmax(mass))
        if mass[i] > best:
            best, arg = float(mass[i]), arr[i].copy()
    return best, arg
