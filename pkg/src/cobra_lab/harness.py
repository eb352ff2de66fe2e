"""Seeded Monte Carlo fan-out, h_max estimation and the Matthews ratio."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .biased import build_metropolis_controller, inverse_degree_chain, run_biased_walk
from .errors import ConfigError, InvalidParams
from .graphs import Graph
from .seeding import make_rng, trial_seed
from .stats import SampleStats, ScalingFit, fit_scaling, summarize
from .walks import CobraConfig, default_cap, first_activation_times, run_cobra_cover, run_cobra_hitting
from .walt import WaltConfig, run_walt_cover

__all__ = [
    "ProcessSpec",
    "Quantity",
    "HmaxEstimate",
    "MatthewsReport",
    "SampleStats",
    "ScalingFit",
    "run_trial",
    "run_trials",
    "estimate_hmax",
    "matthews_check",
    "fit_scaling",
    "summarize",
]

PROCESS_KINDS = ("cobra", "srw", "walt", "metropolis", "inverse-degree")
HMAX_ALL_PAIRS_N = 64


@dataclass(frozen=True)
class ProcessSpec:
    """Which process to run: ``cobra`` (k), ``srw``, ``walt`` (delta, lazy),
    or a biased walk toward the hitting target (``metropolis``,
    ``inverse-degree``)."""

    kind: str = "cobra"
    k: int = 2
    delta: float = 0.5
    lazy: bool = False

    @classmethod
    def parse(cls, text: str) -> "ProcessSpec":
        """Parse ``cobra:k=2``, ``srw``, ``walt:delta=0.5,lazy`` and the like."""
        kind, _, rest = text.strip().partition(":")
        if kind not in PROCESS_KINDS:
            raise ConfigError(f"unknown process {kind!r}; expected one of {PROCESS_KINDS}")
        kw: dict = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, val = item.partition("=")
            try:
                if key == "k" and eq:
                    kw["k"] = int(val)
                elif key == "delta" and eq:
                    kw["delta"] = float(val)
                elif key == "lazy":
                    kw["lazy"] = val.lower() not in ("0", "false", "no") if eq else True
                else:
                    raise ConfigError(f"unknown process option {item!r}")
            except ValueError:
                raise ConfigError(f"bad value in process option {item!r}") from None
        if kind == "srw":
            kw["k"] = 1
        spec = cls(kind, **kw)
        if spec.k < 1:
            raise ConfigError("k must be >= 1")
        return spec

    def __str__(self) -> str:
        if self.kind == "cobra":
            return f"cobra:k={self.k}"
        if self.kind == "walt":
            return f"walt:delta={self.delta}" + (",lazy" if self.lazy else "")
        return self.kind


@dataclass(frozen=True)
class Quantity:
    """``cover`` (from ``start``) or ``hit`` (from ``start`` to ``target``)."""

    kind: str = "cover"
    start: int = 0
    target: int = -1

    @classmethod
    def parse(cls, text: str) -> "Quantity":
        """Parse ``cover``, ``cover:3`` or ``hit:0,5``."""
        kind, _, rest = text.strip().partition(":")
        try:
            args = [int(a) for a in rest.split(",")] if rest else []
        except ValueError:
            raise ConfigError(f"bad quantity {text!r}") from None
        if kind == "cover" and len(args) <= 1:
            return cls("cover", args[0] if args else 0)
        if kind == "hit" and len(args) == 2:
            return cls("hit", args[0], args[1])
        raise ConfigError(f"bad quantity {text!r}; expected cover, cover:s or hit:u,v")

    def __str__(self) -> str:
        return f"hit:{self.start},{self.target}" if self.kind == "hit" else f"cover:{self.start}"

    def validate(self, g: Graph) -> None:
        for v in (self.start,) + ((self.target,) if self.kind == "hit" else ()):
            if not 0 <= v < g.n:
                raise InvalidParams(f"vertex {v} out of range for n={g.n}")


def _prepare(g: Graph, proc: ProcessSpec, qty: Quantity):
    qty.validate(g)
    if proc.kind in ("metropolis", "inverse-degree"):
        if qty.kind != "hit":
            raise ConfigError(f"{proc.kind} walks only support hitting quantities")
        if proc.kind == "metropolis":
            return build_metropolis_controller(g, [qty.target])
        return inverse_degree_chain(g, qty.target)
    if proc.kind == "walt" and qty.kind != "cover":
        raise ConfigError("walt only supports the cover quantity")
    return None


def run_trial(g: Graph, proc: ProcessSpec, qty: Quantity, seed: int, cap: int,
              chain=None) -> int | None:
    """One trial on its own stream; None on timeout."""
    if proc.kind in ("cobra", "srw"):
        cfg = CobraConfig(proc.k, qty.start, seed)
        if qty.kind == "hit":
            return run_cobra_hitting(g, cfg, qty.target, cap)
        return run_cobra_cover(g, cfg, cap)
    if proc.kind == "walt":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return run_walt_cover(g, WaltConfig(proc.delta, qty.start, seed, proc.lazy), cap)
    if chain is None:
        chain = _prepare(g, proc, qty)
    return run_biased_walk(chain, qty.start, qty.target, cap, seed)


def _chunk(args):
    g, proc, qty, master, cap, lo, hi = args
    chain = _prepare(g, proc, qty)
    return [run_trial(g, proc, qty, trial_seed(master, i), cap, chain) for i in range(lo, hi)]


def run_trials(g: Graph, process: ProcessSpec | str, quantity: Quantity | str, trials: int,
               master_seed: int, cap: int | None = None, workers: int = 1) -> SampleStats:
    """Run ``trials`` independent trials; trial i uses ``trial_seed(master_seed, i)``.

    Results are gathered in trial order, so the summary does not depend on
    ``workers``.
    """
    proc = ProcessSpec.parse(process) if isinstance(process, str) else process
    qty = Quantity.parse(quantity) if isinstance(quantity, str) else quantity
    if trials < 1:
        raise InvalidParams("trials must be >= 1")
    if workers < 1:
        raise InvalidParams("workers must be >= 1")
    cap = default_cap(g.n) if cap is None else cap
    _prepare(g, proc, qty)
    if workers == 1:
        values = _chunk((g, proc, qty, master_seed, cap, 0, trials))
    else:
        step = math.ceil(trials / (4 * workers))
        jobs = [(g, proc, qty, master_seed, cap, lo, min(trials, lo + step))
                for lo in range(0, trials, step)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            values = [v for part in ex.map(_chunk, jobs) for v in part]
    return summarize(values, cap)


# ---------------------------------------------------------------------------
# h_max and the Matthews ratio

@dataclass(frozen=True)
class HmaxEstimate:
    """Largest empirical mean hitting time over the sampled sources.

    ``means[i, v]`` is the mean hitting time from ``sources[i]`` to ``v``
    and ``stderrs[i, v]`` its standard error; ``cover_means[i]`` is the
    mean cover time from the same runs.
    """

    value: float
    pair: tuple[int, int]
    sources: tuple[int, ...]
    means: np.ndarray
    stderrs: np.ndarray
    cover_means: np.ndarray
    trials_per_source: int
    timeouts: int


def _source_runs(g, k, src, trials, seed, cap):
    first = np.empty((trials, g.n), dtype=np.int64)
    cover = np.empty(trials, dtype=np.int64)
    for i in range(trials):
        t, f = first_activation_times(g, CobraConfig(k, src, trial_seed(seed, i)), cap)
        cover[i] = -1 if t is None else t
        first[i] = f
    return cover, first


def estimate_hmax(g: Graph, k: int = 2, trials_per_pair: int = 1000, seed: int = 0,
                  sources=None, max_sources: int = HMAX_ALL_PAIRS_N,
                  cap: int | None = None) -> HmaxEstimate:
    """Estimate h_max from cover runs: the first activation round of v in a
    run from u is a sample of H(u, v), so one run serves every target.

    All sources are used when n <= ``max_sources``; otherwise a seeded
    uniform sample of that many sources.
    """
    if trials_per_pair < 1:
        raise InvalidParams("trials_per_pair must be >= 1")
    cap = default_cap(g.n) if cap is None else cap
    if sources is None:
        if g.n <= max_sources:
            sources = range(g.n)
        else:
            sources = np.sort(make_rng(trial_seed(seed, -1)).choice(g.n, max_sources, replace=False))
    sources = tuple(int(s) for s in sources)
    means = np.zeros((len(sources), g.n))
    stderrs = np.zeros((len(sources), g.n))
    cover_means = np.zeros(len(sources))
    timeouts = 0
    for row, u in enumerate(sources):
        cover, first = _source_runs(g, k, u, trials_per_pair, trial_seed(seed, u), cap)
        ok = cover >= 0
        timeouts += int((~ok).sum())
        if not ok.any():
            means[row] = np.inf
            cover_means[row] = np.inf
            continue
        means[row] = first[ok].mean(axis=0)
        if ok.sum() > 1:
            stderrs[row] = first[ok].std(axis=0, ddof=1) / math.sqrt(ok.sum())
        cover_means[row] = cover[ok].mean()
    i, v = np.unravel_index(int(np.argmax(means)), means.shape)
    return HmaxEstimate(float(means[i, v]), (sources[i], int(v)), sources, means, stderrs, cover_means,
                        trials_per_pair, timeouts)


@dataclass(frozen=True)
class MatthewsReport:
    cover_mean: float
    hmax: float
    ratio: float
    pair: tuple[int, int]
    cover_start: int


def matthews_check(g: Graph, k: int = 2, trials: int = 1000, seed: int = 0,
                   max_sources: int = HMAX_ALL_PAIRS_N, cap: int | None = None) -> MatthewsReport:
    """Cover time against h_max * ln n, both from the same cover runs.

    The cover estimate is the largest mean cover time over the sources.
    """
    if g.n < 2:
        raise InvalidParams("need n >= 2 for ln n > 0")
    est = estimate_hmax(g, k, trials, seed, max_sources=max_sources, cap=cap)
    j = int(np.argmax(est.cover_means))
    cover = float(est.cover_means[j])
    return MatthewsReport(cover, est.value, cover / (est.value * math.log(g.n)), est.pair,
                          est.sources[j])
