from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cobra_lab.biased import (BoundReport, activation_probability, azar_bound,
                              best_deterministic_controller_mass, build_metropolis_controller,
                              controller_stationary_masses, epsilon_biased_chain,
                              greedy_controller, inverse_bound, inverse_degree_chain,
                              path_sum_bound, regular_bound, run_biased_walk, sigma_to_set)
from cobra_lab.errors import (BiasViolation, DegenerateSigma, InvalidParams, TooLarge)
from cobra_lab.graphs import generate
from cobra_lab.oracle import FiniteChain, exact_hitting, exact_stationary, return_times
from cobra_lab.seeding import trial_seed
from cobra_lab.walks import CobraConfig, first_activation_times

from conftest import atlas, connected_graphs, random_connected

SEED = 1
TOL = 1e-9


def random_graphs_up_to_10(count=50):
    rng = np.random.default_rng(SEED)
    out = []
    for i in range(count):
        n = int(rng.integers(8, 11))
        out.append(random_connected(n, int(rng.integers(0, n * (n - 1) // 2)), i))
    return out


def test_k2_forced_move():
    ch = build_metropolis_controller(generate("complete", n=2), [1])
    assert ch.matrix[0, 1] == 1


def test_c4_construction():
    g = generate("cycle", n=4)
    ch = build_metropolis_controller(g, [0])
    assert ch.lazy_matrix.sum(axis=1) == pytest.approx(np.ones(4), abs=1e-12)
    assert ch.matrix.sum(axis=1) == pytest.approx(np.ones(4), abs=1e-12)
    sig = sigma_to_set(g, [0])
    assert ch.target_law == pytest.approx(np.where(np.arange(4) == 0, 2, 2 * sig) /
                                          np.where(np.arange(4) == 0, 2, 2 * sig).sum())
    # neighbours of S keep full weight; the antipode is discounted
    assert ch.target_law[2] < ch.target_law[1] == pytest.approx(ch.target_law[0])
    for x in (1, 2, 3):
        assert ch.matrix[x, g.neighbors(x)].min() >= 0.25 - 1e-12


def all_metropolis_cases():
    for g in atlas(7, 2):
        for v in range(g.n):
            yield g, [v]
    for g in random_graphs_up_to_10():
        for v in range(g.n):
            yield g, [v]
        yield g, [0, g.n - 1]


def test_metropolis_invariants_on_all_small_graphs():
    """Bias floor, row sums, stationarity of M and P, and the return-time identity."""
    count = 0
    for g, S in all_metropolis_cases():
        ch = build_metropolis_controller(g, S)
        deg = g.degrees
        m = ch.lazy_matrix
        assert np.abs(m.sum(axis=1) - 1).max() <= 1e-12
        assert np.abs(ch.matrix.sum(axis=1) - 1).max() <= 1e-12
        assert np.abs(ch.target_law @ m - ch.target_law).max() <= 1e-10
        assert np.abs(exact_stationary(FiniteChain(m)) - ch.target_law).max() <= 1e-10
        assert np.abs(ch.stationary @ ch.matrix - ch.stationary).max() <= 1e-10
        for x in set(range(g.n)) - set(S):
            nb = g.neighbors(x)
            assert ch.matrix[x, nb].min() >= (1 - 1 / deg[x]) / deg[x] - 1e-12
        assert return_times(ch.chain()) * ch.stationary == pytest.approx(np.ones(g.n), abs=1e-9)
        count += 1
    assert count > 5000


def test_return_time_within_inverse_bound():
    for g in list(atlas(7, 2)) + random_graphs_up_to_10():
        for v in range(g.n):
            ch = build_metropolis_controller(g, [v])
            rep = inverse_bound(g, v)
            assert return_times(ch.chain())[v] <= rep.value + TOL, (g.name, v)
            assert rep.extra["relaxed"] >= rep.value - TOL


def test_other_conventions_break_the_bias_floor():
    # the interior convention is the one under which the construction holds
    g = generate("path", n=4)
    with pytest.raises(DegenerateSigma):
        build_metropolis_controller(g, [3], convention="source")
    violations = 0
    for g in atlas(5, 3):
        for v in range(g.n):
            try:
                build_metropolis_controller(g, [v], convention="target")
            except (BiasViolation, DegenerateSigma):
                violations += 1
    assert violations > 0


def test_chain_validation():
    g = generate("cycle", n=5)
    with pytest.raises(InvalidParams):
        build_metropolis_controller(g, [])
    with pytest.raises(InvalidParams):
        build_metropolis_controller(g, [5])
    with pytest.raises(InvalidParams):
        epsilon_biased_chain(g, 0.5, [2, 0, 1, 2, 3])
    with pytest.raises(InvalidParams):
        epsilon_biased_chain(g, 1.5, greedy_controller(g, [0]))


def test_epsilon_and_inverse_degree_chains():
    g = generate("star", n=5)
    ctrl = greedy_controller(g, [1])
    ch = epsilon_biased_chain(g, 0.3, ctrl)
    assert ch.matrix[0, 1] == pytest.approx(0.7 / 4 + 0.3)
    assert ch.matrix.sum(axis=1) == pytest.approx(np.ones(5))
    inv = inverse_degree_chain(generate("cycle", n=6), 0)
    assert inv.matrix[0, [1, 5]] == pytest.approx([0.5, 0.5])
    assert inv.matrix[3, [2, 4]] == pytest.approx([0.75, 0.25])
    assert inv.matrix[2, 1] == pytest.approx(0.75)


def test_run_biased_walk():
    ch = build_metropolis_controller(generate("path", n=3), [2])
    assert run_biased_walk(ch, 2, 2) == 0
    exact = exact_hitting(ch.chain(), [2])[0]
    t = np.array([run_biased_walk(ch, 0, 2, seed=trial_seed(SEED, i)) for i in range(100_000)],
                 dtype=float)
    assert abs(t.mean() - exact) <= 3 * t.std(ddof=1) / math.sqrt(t.size)
    with pytest.raises(InvalidParams):
        run_biased_walk(ch, 0, 3)


def test_biased_walk_timeout():
    ch = inverse_degree_chain(generate("path", n=30), 29)
    assert run_biased_walk(ch, 0, 29, cap=3) is None


# --- bounds --------------------------------------------------------------------

def test_bound_report_rejects_bad_values():
    with pytest.raises(InvalidParams):
        BoundReport("azar", 0.0, {})
    with pytest.raises(InvalidParams):
        BoundReport("inverse", math.inf, {})
    assert BoundReport("path-sum", 0.0, {}).value == 0


@pytest.mark.parametrize("n", [3, 5, 12])
@pytest.mark.parametrize("eps", [0.1, 0.5, 0.9])
def test_azar_star_center(n, eps):
    assert azar_bound(generate("star", n=n), [0], eps).value == pytest.approx(0.5)


def test_azar_limit_eps_to_one():
    g = generate("path", n=6)
    near = azar_bound(g, [0], 1 - 1e-12).value
    # vol(S) = 1 and the only vertex at distance 1 has degree 2
    assert near == pytest.approx(1 / 3, abs=1e-9)


def test_azar_validation():
    with pytest.raises(InvalidParams):
        azar_bound(generate("cycle", n=4), [0], 0)
    with pytest.raises(InvalidParams):
        azar_bound(generate("cycle", n=4), [0], 1)


def test_azar_below_best_controller_on_c6():
    g = generate("cycle", n=6)
    best, ctrl = best_deterministic_controller_mass(g, [0], 0.5)
    assert azar_bound(g, [0], 0.5).value <= best + TOL
    assert controller_stationary_masses(g, [0], 0.5, ctrl[None, :])[0] == pytest.approx(best)
    assert best == pytest.approx(epsilon_biased_chain(g, 0.5, ctrl).stationary[0])


def test_azar_below_best_controller_small_graphs():
    graphs = list(atlas(5, 2)) + [generate("cycle", n=8), generate("path", n=8),
                                  generate("star", n=8), generate("complete", n=5)]
    for g in graphs:
        sets = [[v] for v in range(g.n)] + [list(p) for p in itertools.combinations(range(g.n), 2)]
        for S in sets[:12]:
            for eps in (0.2, 0.6):
                best, _ = best_deterministic_controller_mass(g, S, eps)
                assert azar_bound(g, S, eps).value <= best + TOL, (g.name, S, eps)


def test_controller_budget():
    with pytest.raises(TooLarge):
        best_deterministic_controller_mass(generate("complete", n=9), [0], 0.5)


def test_inverse_bound_k2():
    g = generate("complete", n=2)
    assert inverse_bound(g, 1, convention="source").value == 1
    # with interior weights the neighbour's empty product is 1
    assert inverse_bound(g, 1).value == 2


@settings(max_examples=60, deadline=None)
@given(connected_graphs(2, 10), st.data())
def test_relaxed_inverse_bound_dominates(g, data):
    v = data.draw(st.integers(0, g.n - 1))
    for conv in ("interior", "source"):
        rep = inverse_bound(g, v, conv)
        assert rep.extra["relaxed"] >= rep.value - TOL


SWEEP = [(n, delta) for delta in range(3, 11) for n in (10, 100, 1000, 10 ** 4, 10 ** 5, 10 ** 6)]


def test_regular_beta_power_below_n_root():
    # claimed for every delta >= 3. From delta = 4 on it is false: beta^L exceeds
    # ((n-1)(delta-2)/delta + 1)^(-1/delta), which itself exceeds n^(-1/delta)
    bad = [(n, delta) for n, delta in SWEEP
           if not regular_bound(n, delta).extra["beta_L"] < n ** (-1 / delta)]
    assert bad == []


def test_regular_beta_power_delta_three():
    for n in (10, 100, 1000, 10 ** 4, 10 ** 5, 10 ** 6):
        assert regular_bound(n, 3).extra["beta_L"] < n ** (-1 / 3)


def test_regular_bound_sweep():
    for n, delta in SWEEP:
        rep = regular_bound(n, delta)
        L = rep.extra["L"]
        assert delta * ((delta - 1) ** L - 1) / (delta - 2) == pytest.approx(n - 1, rel=1e-9)
        assert rep.extra["return_bound"] == pytest.approx(1 + n ** (1 - 1 / delta))


def test_regular_bound_examples():
    assert regular_bound(100, 3).extra["L"] == pytest.approx(math.log2(34))
    for bad in (2, 1):
        with pytest.raises(InvalidParams):
            regular_bound(100, bad)


def test_path_sum_examples():
    g = generate("petersen")
    assert path_sum_bound(g, 4, 4).value == 0
    rep = path_sum_bound(g, 0, 7)
    assert rep.extra["expanded"] >= rep.value - TOL
    assert rep.extra["path"][0] == 0 and rep.extra["path"][-1] == 7


@settings(max_examples=60, deadline=None)
@given(connected_graphs(2, 10), st.data())
def test_path_sum_expanded_dominates(g, data):
    u = data.draw(st.integers(0, g.n - 1))
    v = data.draw(st.integers(0, g.n - 1))
    rep = path_sum_bound(g, u, v)
    assert rep.extra["expanded"] >= rep.value - TOL


def test_activation_examples():
    assert activation_probability(1)[0] == 1
    assert activation_probability(2)[0] == pytest.approx(0.75)
    with pytest.raises(InvalidParams):
        activation_probability(0)


def test_activation_floor_all_degrees():
    d = np.arange(1, 10 ** 6 + 1, dtype=float)
    pstar = 1 - (1 - 1 / d) ** 2
    assert np.all(pstar >= 2 / d - 1 / d ** 2 - 1e-15)
    for deg in (1, 2, 3, 10, 999, 10 ** 6):
        pstar, floor = activation_probability(deg)
        assert pstar >= floor - 1e-15
        assert pstar >= 2 / deg - 1 / deg ** 2 - 1e-15


# --- dominance chain -----------------------------------------------------------------

def hitting_matrix(g, chain_for):
    h = np.zeros((g.n, g.n))
    for v in range(g.n):
        h[:, v] = exact_hitting(chain_for(v).chain(), [v])
    return h


def test_metropolis_hitting_below_path_sum():
    for g in list(atlas(7, 2)) + random_graphs_up_to_10():
        hp = hitting_matrix(g, lambda v: build_metropolis_controller(g, [v]))
        for u in range(g.n):
            for v in range(g.n):
                assert hp[u, v] <= path_sum_bound(g, u, v).value + TOL, (g.name, u, v)


def test_cobra_hitting_below_metropolis_hitting():
    trials = 300
    for gi, g in enumerate(list(atlas(7, 2)) + random_graphs_up_to_10()):
        hp = hitting_matrix(g, lambda v: build_metropolis_controller(g, [v]))
        for u in range(g.n):
            first = np.array([first_activation_times(
                g, CobraConfig(2, u, trial_seed(trial_seed(SEED, gi * 16 + u), i)))[1]
                for i in range(trials)], dtype=float)
            mean = first.mean(axis=0)
            se = first.std(axis=0, ddof=1) / math.sqrt(trials)
            assert np.all(mean <= hp[u] + 3 * se + TOL), (g.name, u)
