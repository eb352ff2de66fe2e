"""Named campaigns, one per scaling law or bound under test.

Each campaign takes keyword overrides of its defaults and returns a list
of :class:`ResultRow`, data rows first and fit rows last.
"""
from __future__ import annotations

import inspect
import math
import warnings

import numpy as np

from .biased import build_metropolis_controller, path_sum_bound, regular_bound
from .errors import ConfigError, UnknownExperiment
from .graphs import Graph, conductance_exact, generate, parse_graph_spec, spectral_gap
from .harness import estimate_hmax, matthews_check, run_trials
from .oracle import exact_hitting, srw_chain
from .results import ResultRow
from .seeding import trial_seed
from .stats import fit_scaling
from .walks import (TrackedGridState, biased_dim_equilibrium, biased_dim_occupancy,
                    tracked_dimension_frequencies, tracked_two_step_frequencies)
from .walt import (collision_bound, conductance_cover_envelope, dominance_trial, epoch_length,
                   tensor_pair_walk, tensor_stationary)

STANDARD_CORPUS = ("path:8", "cycle:8", "complete:5", "star:16", "petersen", "hypercube:4",
                   "grid2d:8", "random-3-regular:64")
DOMINANCE_GRAPHS = ("cycle:8", "complete:5", "petersen", "hypercube:4")


def corpus(name: str = "standard") -> list[Graph]:
    if name != "standard":
        raise ConfigError(f"unknown corpus {name!r}")
    return [parse_graph_spec(s) for s in STANDARD_CORPUS]


def lollipop_candidates(n: int) -> tuple[int, ...]:
    """Clique vertex, junction, path midpoint and path end of ``lollipop(n)``."""
    c = math.ceil(2 * n / 3)
    return tuple(sorted({0, c - 1, (c - 1 + n - 1) // 2, n - 1}))


def grid_linear(sides=(16, 32, 64, 128, 256), dim=2, trials=200, seed=1, k=2, workers=1):
    rows, pts = [], []
    for side in sides:
        g = generate("grid", d=dim, side=side)
        s = run_trials(g, f"cobra:k={k}", "cover:0", trials, trial_seed(seed, side), workers=workers)
        rows.append(ResultRow.from_stats("grid-linear", g, s, k=k, seed=seed, quantity="cover:0",
                                         extra={"side": side, "dim": dim}))
        pts.append((side, s.mean))
    rows.append(ResultRow.from_fit("grid-linear", f"grid{dim}d", fit_scaling(pts, "log-log"),
                                   "cover-vs-side", seed))
    return rows


def expander_polylog(ns=(256, 512, 1024, 2048, 4096), degree=3, trials=100, seed=1, k=2,
                     graph_seed=0, workers=1):
    rows, pts = [], []
    for n in ns:
        g = generate("random-regular", n=n, d=degree, seed=graph_seed)
        nu2 = spectral_gap(g)
        env = conductance_cover_envelope(nu2, degree, n)
        s = run_trials(g, f"cobra:k={k}", "cover:0", trials, trial_seed(seed, n), workers=workers)
        rows.append(ResultRow.from_stats("expander-polylog", g, s, k=k, seed=seed,
                                         quantity="cover:0", bound_value=env,
                                         extra={"nu2": nu2, "within_envelope": s.mean <= env}))
        pts.append((n, s.mean))
    rows.append(ResultRow.from_fit("expander-polylog", f"random-{degree}-regular",
                                   fit_scaling(pts, "value-vs-log2"), "cover-vs-log2n", seed))
    return rows


def regular_hitting(ns=(64, 128, 256, 512), degree=3, trials=200, sources=8, seed=1, k=2,
                    graph_seed=0):
    rows, pts = [], []
    for n in ns:
        g = generate("random-regular", n=n, d=degree, seed=graph_seed)
        est = estimate_hmax(g, k, trials, trial_seed(seed, n), max_sources=sources)
        rep = regular_bound(n, degree)
        rows.append(ResultRow.scalar("regular-hitting", g, est.value, k=k, seed=seed,
                                     trials=trials * len(est.sources), quantity="hmax",
                                     bound_value=rep.value,
                                     extra={"trials_per_source": trials, "sources": len(est.sources),
                                            "pair": est.pair, "return_bound": rep.extra["return_bound"]}))
        pts.append((n, est.value))
    rows.append(ResultRow.from_fit("regular-hitting", f"random-{degree}-regular",
                                   fit_scaling(pts, "log-log"), "hmax-vs-n", seed))
    return rows


def srw_worst_hitting(g: Graph, targets) -> tuple[float, tuple[int, int]]:
    """Exact worst SRW hitting time into any of ``targets``."""
    best, pair = -1.0, (0, 0)
    chain = srw_chain(g)
    for v in targets:
        h = exact_hitting(chain, [v])
        u = int(np.argmax(h))
        if h[u] > best:
            best, pair = float(h[u]), (u, int(v))
    return best, pair


def general_hitting(ns=(32, 64, 128, 256), trials=200, seed=1, k=2):
    rows, cobra_pts, srw_pts = [], [], []
    for n in ns:
        g = generate("lollipop", n=n)
        cand = lollipop_candidates(n)
        est = estimate_hmax(g, k, trials, trial_seed(seed, n), sources=cand)
        srw, pair = srw_worst_hitting(g, cand)
        rows.append(ResultRow.scalar("general-hitting", g, est.value, k=k, seed=seed,
                                     trials=trials * len(cand), quantity="hmax",
                                     extra={"trials_per_source": trials, "pair": est.pair,
                                            "candidates": cand}))
        rows.append(ResultRow.exact("general-hitting", g, srw, k=1, quantity="hmax-srw-exact",
                                    extra={"pair": pair}))
        cobra_pts.append((n, est.value))
        srw_pts.append((n, srw))
    cf = fit_scaling(cobra_pts, "log-log")
    sf = fit_scaling(srw_pts, "log-log")
    rows.append(ResultRow.from_fit("general-hitting", "lollipop", cf, "cobra-hmax-vs-n", seed))
    rows.append(ResultRow.from_fit("general-hitting", "lollipop", sf, "srw-hmax-vs-n", seed,
                                   extra={"cobra_below_srw": cf.slope < sf.slope}))
    return rows


def dominance(graphs=DOMINANCE_GRAPHS, max_n=16, trials=10_000, seed=1, k=2, z=3.0,
              chain_max_n=10, chain_trials=2000):
    """Cobra cover against stacked W_alt cover, and for small graphs the
    hitting chain cobra <= Metropolis <= path-sum over all pairs."""
    rows = []
    for spec in graphs:
        g = parse_graph_spec(spec)
        if g.n > max_n:
            continue
        c, w = dominance_trial(g, 0, trials, trial_seed(seed, g.n), k=k)
        pooled = math.hypot(c.stderr, w.stderr)
        rows.append(ResultRow.from_stats("dominance", g, c, k=k, seed=seed, quantity="cover:0",
                                         bound_value=w.mean,
                                         extra={"walt_mean": w.mean, "walt_stderr": w.stderr,
                                                "pass": c.mean <= w.mean + z * pooled}))
        if g.n <= chain_max_n:
            rows.append(hitting_chain_row(g, k, chain_trials, seed, z))
    return rows


def hitting_chain_row(g: Graph, k: int, trials: int, seed: int, z: float = 3.0) -> ResultRow:
    """Worst slacks of cobra H <= Metropolis H <= path-sum bound over all pairs."""
    est = estimate_hmax(g, k, trials, trial_seed(seed, 7 * g.n), sources=range(g.n))
    worst_mc = worst_bound = -math.inf
    for v in range(g.n):
        hp = exact_hitting(build_metropolis_controller(g, [v]).chain(), [v])
        for u in range(g.n):
            if u == v:
                continue
            worst_mc = max(worst_mc, est.means[u, v] - z * est.stderrs[u, v] - hp[u])
            worst_bound = max(worst_bound, hp[u] - path_sum_bound(g, u, v).value)
    ok = worst_mc <= 0 and worst_bound <= 1e-9
    return ResultRow.scalar("dominance", g, est.value, k=k, seed=seed, trials=trials * g.n,
                            quantity="hitting-chain",
                            extra={"worst_cobra_minus_metropolis": worst_mc,
                                   "worst_metropolis_minus_pathsum": worst_bound, "pass": ok})


def tensor_stationary_campaign(graph="cycle:6", trials=100_000, steps=None, seed=1):
    g = parse_graph_spec(graph)
    d = g.regular_degree()
    if d is None:
        raise ConfigError("tensor-stationary needs a regular graph")
    phi = float(conductance_exact(g).phi)
    s = epoch_length(phi, d, g.n) if steps is None else int(steps)
    occ = tensor_pair_walk(g, s, trials, seed)
    pi = tensor_stationary(g.n)
    tv = 0.5 * float(np.abs(occ.per_state - pi).sum())
    return [ResultRow.scalar("tensor-stationary", g, occ.diag_mass, seed=seed, trials=trials,
                             quantity=f"diag-mass@{s}", bound_value=2 / (g.n + 1),
                             extra={"tv": tv, "steps": s, "phi": phi,
                                    "max_collision": float(np.max(np.diag(occ.per_state))),
                                    "collision_bound": collision_bound(g.n)})]


def matthews(corpus_name="standard", trials=1000, seed=1, k=2, limit=4.0):
    rows = []
    for g in corpus(corpus_name):
        r = matthews_check(g, k, trials, trial_seed(seed, g.n))
        rows.append(ResultRow.scalar("matthews", g, r.cover_mean, k=k, seed=seed,
                                     trials=trials, quantity="cover",
                                     extra={"hmax": r.hmax, "ratio": r.ratio, "pair": r.pair,
                                            "trials_per_source": trials, "pass": r.ratio <= limit}))
    return rows


def drift(samples=1_000_000, side=500, seed=1, dim=2, steps=2_000_000):
    rows = []
    mid = side // 2
    cases = [("closest", "one-matched", (mid, mid), (mid, mid - 50)),
             ("dgrid", "one-matched", (mid, mid), (mid, mid - 50)),
             ("closest", "both-nonzero", (mid, mid), (mid - 40, mid - 50)),
             ("dgrid", "both-nonzero", (mid, mid), (mid - 40, mid - 50))]
    name, n = f"grid:d={dim},side={side}", (side + 1) ** dim
    for i, (policy, label, pos, target) in enumerate(cases):
        st = TrackedGridState(pos, target, side)
        f = tracked_two_step_frequencies(st, samples, trial_seed(seed, i), policy)
        rows.append(ResultRow("drift", name, n, 2 * dim, 2, seed, f"two-step:{policy}:{label}",
                              samples, extra={"minus2": f[-2], "zero": f[0], "plus2": f[2]}))
    st = TrackedGridState((mid, mid), (mid - 40, mid - 50), side)
    f = tracked_dimension_frequencies(st, 0, samples, trial_seed(seed, 10))
    rows.append(ResultRow("drift", name, n, 2 * dim, 2, seed, "one-step:dgrid:dim0", samples,
                          extra={k: f[k] for k in ("changed", "decreased", "increased")}))
    occ = biased_dim_occupancy(dim, steps, trial_seed(seed, 11))
    pi = biased_dim_equilibrium(dim)
    err = max(abs(occ[j] - pi(j)) for j in range(occ.size))
    rows.append(ResultRow("drift", "reflected-walk", None, None, None, seed, "equilibrium", steps,
                          extra={"max_abs_error": float(err), "pi0": pi(0), "occ0": float(occ[0])}))
    return rows


CAMPAIGNS = {
    "grid-linear": grid_linear,
    "expander-polylog": expander_polylog,
    "regular-hitting": regular_hitting,
    "general-hitting": general_hitting,
    "dominance": dominance,
    "tensor-stationary": tensor_stationary_campaign,
    "matthews": matthews,
    "drift": drift,
}


def run_experiment(name: str, **overrides) -> list[ResultRow]:
    try:
        fn = CAMPAIGNS[name]
    except KeyError:
        raise UnknownExperiment(f"unknown experiment {name!r}; expected one of {sorted(CAMPAIGNS)}") from None
    accepted = inspect.signature(fn).parameters
    bad = sorted(set(overrides) - set(accepted))
    if bad:
        raise ConfigError(f"experiment {name} does not accept {bad}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(**overrides)
