"""k-cobra walk engine, simple random walk baseline and the tracked-pebble
grid observer."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels as K
from .errors import InvalidParams
from .graphs import Graph
from .oracle import members
from .seeding import make_rng

__all__ = [
    "ActiveSet",
    "CobraConfig",
    "TrackedGridState",
    "default_cap",
    "cobra_step",
    "run_cobra_hitting",
    "run_cobra_cover",
    "first_activation_times",
    "tracked_grid_step",
    "tracked_two_step_frequencies",
    "tracked_dimension_frequencies",
    "biased_dim_equilibrium",
    "biased_dim_occupancy",
]


def default_cap(n: int) -> int:
    """Timeout cap of 64 n^3 rounds."""
    return 64 * n ** 3


@dataclass(frozen=True)
class ActiveSet:
    """Active vertices of a cobra walk as a bit mask, plus the round number."""

    bits: int
    round: int = 0

    @classmethod
    def of(cls, vertices, round: int = 0) -> "ActiveSet":
        bits = 0
        for v in vertices:
            bits |= 1 << int(v)
        return cls(bits, round)

    def members(self) -> list[int]:
        return members(self.bits)

    def __contains__(self, v: int) -> bool:
        return bool(self.bits >> v & 1)

    def __len__(self) -> int:
        return bin(self.bits).count("1")


@dataclass(frozen=True)
class CobraConfig:
    k: int = 2
    start: int = 0
    seed: int = 0

    def validate(self, g: Graph) -> None:
        if self.k < 1:
            raise InvalidParams("branching factor k must be >= 1")
        if not 0 <= self.start < g.n:
            raise InvalidParams(f"start {self.start} out of range for n={g.n}")


def cobra_step(g: Graph, s: ActiveSet, rng: np.random.Generator, k: int = 2) -> ActiveSet:
    """One round: every active vertex activates k neighbours drawn uniformly
    with replacement; the next active set is their union."""
    if not s.bits:
        raise InvalidParams("active set must be nonempty")
    nxt = 0
    for v in s.members():
        nb = g.neighbors(v)
        for _ in range(k):
            nxt |= 1 << int(nb[int(rng.random() * nb.size)])
    return ActiveSet(nxt, s.round + 1)


def _run(g, cfg, target, cap, first):
    cfg.validate(g)
    if cap is None:
        cap = default_cap(g.n)
    if cap <= 0:
        raise InvalidParams("cap must be positive")
    t = K.cobra_run(g.indptr, g.indices, cfg.k, cfg.start, target, cap, make_rng(cfg.seed), first)
    return None if t < 0 else int(t)


def run_cobra_hitting(g: Graph, cfg: CobraConfig, target: int, cap: int | None = None) -> int | None:
    """First round at which ``target`` is active; None on timeout."""
    if not 0 <= target < g.n:
        raise InvalidParams(f"target {target} out of range")
    return _run(g, cfg, target, cap, np.empty(g.n, dtype=np.int64))


def run_cobra_cover(g: Graph, cfg: CobraConfig, cap: int | None = None) -> int | None:
    """First round by which every vertex has been active; None on timeout."""
    return _run(g, cfg, -1, cap, np.empty(g.n, dtype=np.int64))


def first_activation_times(g: Graph, cfg: CobraConfig,
                           cap: int | None = None) -> tuple[int | None, np.ndarray]:
    """Run to cover and return (cover time, first-activation round per vertex).

    ``first[v]`` is the hitting time of v for this trajectory, so one run
    yields samples of H(start, v) for every v at once.
    """
    first = np.empty(g.n, dtype=np.int64)
    return _run(g, cfg, -1, cap, first), first


# ---------------------------------------------------------------------------
# tracked pebble on [0, side]^d

POLICIES = {"dgrid": K.POLICY_DGRID, "closest": K.POLICY_CLOSEST}


@dataclass(frozen=True)
class TrackedGridState:
    """Tracked pebble position and target on the grid ``[0, side]^d``."""

    pos: tuple[int, ...]
    target: tuple[int, ...]
    side: int

    def __post_init__(self):
        if len(self.pos) != len(self.target):
            raise InvalidParams("pos and target must have the same dimension")
        for c in self.pos + self.target:
            if not 0 <= c <= self.side:
                raise InvalidParams(f"coordinate {c} outside [0, {self.side}]")

    @property
    def z(self) -> tuple[int, ...]:
        """Per-dimension distance to the target."""
        return tuple(abs(p - t) for p, t in zip(self.pos, self.target))

    @property
    def distance(self) -> int:
        return sum(self.z)


def _policy(name):
    try:
        return POLICIES[name]
    except KeyError:
        raise InvalidParams(f"policy must be one of {sorted(POLICIES)}") from None


def tracked_grid_step(state: TrackedGridState, rng: np.random.Generator,
                      policy: str = "dgrid") -> TrackedGridState:
    """Move both clones of the tracked pebble and keep one of them.

    ``dgrid`` keeps the clone that moved closer when both moved in the same
    dimension; across dimensions it prefers the dimension whose distance is
    nonzero, then the closer clone, else a fair coin. ``closest`` keeps the
    clone nearer the target in Manhattan distance, breaking ties toward the
    clone with more unmatched coordinates, then by coin.
    """
    pos = np.array(state.pos, dtype=np.int64)
    K.tracked_step(pos, np.array(state.target, dtype=np.int64), state.side, _policy(policy), rng)
    return TrackedGridState(tuple(int(c) for c in pos), state.target, state.side)


def tracked_two_step_frequencies(state: TrackedGridState, samples: int, seed: int,
                                 policy: str = "closest") -> dict[int, float]:
    """Empirical law of the two-round change in Manhattan distance."""
    counts = K.tracked_two_step_counts(
        np.array(state.pos, dtype=np.int64), np.array(state.target, dtype=np.int64),
        state.side, _policy(policy), samples, make_rng(seed))
    return {delta: counts[delta + 2] / samples for delta in (-2, 0, 2)}


def tracked_dimension_frequencies(state: TrackedGridState, dim: int, samples: int, seed: int,
                                  policy: str = "dgrid") -> dict[str, float]:
    """One-round frequencies for coordinate ``dim``: change, decrease, increase."""
    changed, dec, inc = K.tracked_dimension_counts(
        np.array(state.pos, dtype=np.int64), np.array(state.target, dtype=np.int64),
        state.side, _policy(policy), dim, samples, make_rng(seed))
    return {"changed": changed / samples, "decreased": dec / samples,
            "increased": inc / samples, "samples": samples}


def biased_dim_equilibrium(d: int) -> Callable[[int], float]:
    """Equilibrium law of one coordinate's distance under the grid drift.

    The chain steps down with probability 1/2 + 1/(8d-4), up otherwise, and
    holds at 0; detailed balance gives
    ``pi_j = 2/(4d-1) * ((4d-3)/(4d-1))**j``.
    """
    if d < 1:
        raise InvalidParams("dimension must be >= 1")
    ratio = (4 * d - 3) / (4 * d - 1)
    head = 2 / (4 * d - 1)

    def pi(j: int) -> float:
        if j < 0:
            raise InvalidParams("j must be >= 0")
        return head * ratio ** j

    return pi


def biased_dim_occupancy(d: int, steps: int, seed: int, burn_in: int = 10_000,
                         width: int = 64) -> np.ndarray:
    """Empirical occupancy of that chain over ``steps`` rounds after burn-in."""
    up = 0.5 - 1.0 / (8 * d - 4)
    counts = K.reflected_biased_occupancy(up, burn_in, steps, width, make_rng(seed))
    return counts / steps
