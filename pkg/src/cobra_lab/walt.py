"""The W_alt ordered-pebble process, the two-pebble priority walk and the
epoch-length calculator used in the conductance cover bound."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import InvalidParams, RegularityRequired, SupportMismatch
from .graphs import Graph
from .oracle import FiniteChain
from .seeding import make_rng, trial_seed
from .stats import SampleStats, summarize
from .walks import CobraConfig, default_cap, run_cobra_cover

__all__ = [
    "PebbleConfig",
    "WaltConfig",
    "TensorOccupancy",
    "walt_step",
    "run_walt_cover",
    "dominance_trial",
    "tensor_pair_walk",
    "tensor_pair_chain",
    "tensor_stationary",
    "epoch_length",
    "chi_square_distance",
    "collision_bound",
    "conductance_cover_envelope",
]


@dataclass(frozen=True)
class PebbleConfig:
    """Pebble positions; index i is the pebble of order i (0 moves first)."""

    positions: tuple[int, ...]
    round: int = 0
    lazy: bool = True


@dataclass(frozen=True)
class WaltConfig:
    """``start`` is a vertex (all pebbles stacked there) or an explicit
    position list."""

    delta: float = 0.5
    start: int | tuple[int, ...] = 0
    seed: int = 0
    lazy: bool = True

    def placement(self, g: Graph) -> np.ndarray:
        if not 0 < self.delta <= 0.5:
            raise InvalidParams("delta must lie in (0, 1/2]")
        if isinstance(self.start, (tuple, list, np.ndarray)):
            pos = np.asarray(self.start, dtype=np.int64)
            if pos.size == 0:
                raise InvalidParams("need at least one pebble")
        else:
            count = max(2, math.ceil(self.delta * g.n))
            pos = np.full(count, int(self.start), dtype=np.int64)
        if np.any(pos < 0) or np.any(pos >= g.n):
            raise InvalidParams("pebble position out of range")
        return pos


def walt_step(g: Graph, p: PebbleConfig, rng: np.random.Generator) -> PebbleConfig:
    """One W_alt round.

    With ``lazy`` a single fair coin keeps every pebble in place. Otherwise
    pebbles at a vertex holding one or two move independently and
    uniformly; at a vertex holding three or more, the two lowest-order
    pebbles move independently and each other pebble follows one of them
    chosen by a fair coin.
    """
    if p.lazy and rng.random() < 0.5:
        return PebbleConfig(p.positions, p.round + 1, p.lazy)
    load: dict[int, int] = {}
    for v in p.positions:
        load[v] = load.get(v, 0) + 1
    leaders: dict[int, list[int]] = {}
    out = []
    for v in p.positions:
        nb = g.neighbors(v)
        if load[v] <= 2:
            out.append(int(nb[int(rng.random() * nb.size)]))
            continue
        picks = leaders.setdefault(v, [])
        if len(picks) < 2:
            picks.append(int(nb[int(rng.random() * nb.size)]))
            out.append(picks[-1])
        else:
            out.append(picks[0] if rng.random() < 0.5 else picks[1])
    return PebbleConfig(tuple(out), p.round + 1, p.lazy)


def run_walt_cover(g: Graph, cfg: WaltConfig, cap: int | None = None) -> int | None:
    """Rounds until every vertex has held a pebble (initial placement
    included); None on timeout. Warns on non-regular graphs."""
    if g.regular_degree() is None:
        warnings.warn(f"W_alt on non-regular graph {g.name}; the conductance bound does not apply",
                      stacklevel=2)
    pos = cfg.placement(g)
    if cap is None:
        cap = default_cap(g.n)
    t = K.walt_cover(g.indptr, g.indices, pos, cfg.lazy, cap, make_rng(cfg.seed))
    return None if t < 0 else int(t)


def dominance_trial(g: Graph, start: int, trials: int, seed: int, k: int = 2,
                    delta: float = 0.5, lazy: bool = False,
                    cap: int | None = None) -> tuple[SampleStats, SampleStats]:
    """Cover-time samples of the k-cobra walk from ``start`` and of W_alt
    with all its pebbles stacked at ``start``, on independent streams."""
    cobra_master = trial_seed(seed, 0)
    walt_master = trial_seed(seed, 1)
    cap = default_cap(g.n) if cap is None else cap
    cobra = [run_cobra_cover(g, CobraConfig(k, start, trial_seed(cobra_master, i)), cap)
             for i in range(trials)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        walt = [run_walt_cover(g, WaltConfig(delta, start, trial_seed(walt_master, i), lazy), cap)
                for i in range(trials)]
    return summarize(cobra, cap), summarize(walt, cap)


# ---------------------------------------------------------------------------
# two-pebble priority walk

@dataclass(frozen=True)
class TensorOccupancy:
    """Joint law of two priority-ordered pebbles after ``steps`` rounds."""

    diag_mass: float
    per_state: np.ndarray
    steps: int
    trials: int


def _require_regular(g: Graph) -> int:
    d = g.regular_degree()
    if d is None:
        raise RegularityRequired(f"{g.name or 'graph'} is not regular")
    return d


def tensor_pair_walk(g: Graph, steps: int, trials: int, seed: int,
                     start: tuple[int, int] = (0, 0), lazy: bool = True) -> TensorOccupancy:
    """Simulate the two-pebble walk and record where the pair sits at ``steps``."""
    _require_regular(g)
    counts = np.zeros((g.n, g.n), dtype=np.int64)
    K.tensor_pair_sample(g.indptr, g.indices, int(start[0]), int(start[1]), int(steps),
                         int(trials), lazy, make_rng(seed), counts)
    per_state = counts / trials
    return TensorOccupancy(float(np.trace(per_state)), per_state, int(steps), int(trials))


def tensor_pair_chain(g: Graph, lazy: bool = True) -> FiniteChain:
    """Explicit transition matrix of the pair walk; state (i, j) is i*n + j."""
    d = _require_regular(g)
    n = g.n
    p = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            row = p[i * n + j]
            for a in g.neighbors(i):
                if i == j:
                    row[a * n + a] += 0.5 / d
                    for b in g.neighbors(j):
                        row[a * n + b] += 0.5 / (d * d)
                else:
                    for b in g.neighbors(j):
                        row[a * n + b] += 1.0 / (d * d)
    if lazy:
        p = 0.5 * (p + np.eye(n * n))
    return FiniteChain(p)


def tensor_stationary(n: int) -> np.ndarray:
    """Closed form: 2/(n^2+n) on co-located pairs, 1/(n^2+n) elsewhere."""
    pi = np.full((n, n), 1.0 / (n * n + n))
    np.fill_diagonal(pi, 2.0 / (n * n + n))
    return pi


def collision_bound(n: int) -> float:
    """Larger of the two stated collision bounds, 2/(n^2+2) and 2/(n^2+n), plus 1/n^4."""
    return max(2.0 / (n * n + 2), 2.0 / (n * n + n)) + 1.0 / n ** 4


def epoch_length(phi: float, d: int, n: int) -> int:
    """ceil(32 d^4 / phi^2 * (ln(n^2 + n) + 4 ln(n^2)))."""
    if not 0 < phi <= 1:
        raise InvalidParams("phi must lie in (0, 1]")
    if d < 1 or n < 2:
        raise InvalidParams("need d >= 1 and n >= 2")
    return math.ceil(32 * d ** 4 / phi ** 2 * (math.log(n * n + n) + 4 * math.log(n * n)))


def conductance_cover_envelope(nu2: float, d: int, n: int) -> float:
    """32 d^4 ln(n)^2 / nu_2, the envelope used against measured cover means."""
    if nu2 <= 0:
        raise InvalidParams("nu_2 must be positive")
    return 32 * d ** 4 * math.log(n) ** 2 / nu2


def chi_square_distance(empirical, pi) -> float:
    """sum_x (p(x) - pi(x))^2 / pi(x) for a single starting state."""
    p = np.asarray(empirical, dtype=float)
    q = np.asarray(pi, dtype=float)
    if p.shape != q.shape:
        raise SupportMismatch(f"shapes differ: {p.shape} vs {q.shape}")
    if np.any(q <= 0):
        raise SupportMismatch("reference distribution must be strictly positive")
    return float(np.sum((p - q) ** 2 / q))
