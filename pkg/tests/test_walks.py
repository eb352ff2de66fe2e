from __future__ import annotations

import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cobra_lab.errors import InvalidParams
from cobra_lab.graphs import generate
from cobra_lab.oracle import (cobra_transition_distribution, exact_hitting, mask_of,
                              srw_chain)
from cobra_lab.seeding import make_rng, trial_seed
from cobra_lab.walks import (ActiveSet, CobraConfig, TrackedGridState, biased_dim_equilibrium,
                             biased_dim_occupancy, cobra_step, default_cap,
                             first_activation_times, run_cobra_cover, run_cobra_hitting,
                             tracked_dimension_frequencies, tracked_grid_step,
                             tracked_two_step_frequencies)

from conftest import atlas, connected_graphs, random_connected

SEED = 1


def tv(emp: dict, exact: dict) -> float:
    keys = set(emp) | set(exact)
    return 0.5 * sum(abs(emp.get(k, 0.0) - exact.get(k, 0.0)) for k in keys)


def test_active_set_basics():
    s = ActiveSet.of([0, 3, 5], round=2)
    assert s.members() == [0, 3, 5] and len(s) == 3 and 3 in s and 4 not in s and s.round == 2


@settings(max_examples=60, deadline=None)
@given(connected_graphs(2, 10), st.integers(1, 4), st.integers(0, 2 ** 32 - 1), st.data())
def test_cobra_step_invariants(g, k, seed, data):
    verts = data.draw(st.sets(st.integers(0, g.n - 1), min_size=1))
    s = ActiveSet.of(verts)
    rng = make_rng(seed)
    for _ in range(5):
        nxt = cobra_step(g, s, rng, k)
        assert len(nxt) >= 1
        assert len(nxt) <= k * len(s)
        reach = {int(w) for v in s.members() for w in g.neighbors(v)}
        assert set(nxt.members()) <= reach
        assert nxt.round == s.round + 1
        s = nxt


def test_cobra_step_rejects_empty():
    with pytest.raises(InvalidParams):
        cobra_step(generate("cycle", n=4), ActiveSet(0), make_rng(0))


@pytest.mark.parametrize("spec,S,k,samples", [
    (("complete", dict(n=5)), [0, 1], 2, 1_000_000),
    (("path", dict(n=6)), [1, 4], 2, 200_000),
    (("cycle", dict(n=6)), [0, 2, 3], 3, 200_000),
])
def test_single_step_matches_exact_law(spec, S, k, samples):
    g = generate(spec[0], **spec[1])
    rng = make_rng(SEED)
    s = ActiveSet.of(S)
    counts = Counter(cobra_step(g, s, rng, k).bits for _ in range(samples))
    emp = {m: c / samples for m, c in counts.items()}
    assert tv(emp, cobra_transition_distribution(g, mask_of(S), k)) <= 0.01


@pytest.mark.parametrize("spec,start,k", [(("petersen", {}), 0, 2), (("star", dict(n=6)), 0, 2),
                                          (("path", dict(n=5)), 2, 3), (("complete", dict(n=4)), 1, 1)])
def test_compiled_step_matches_exact_law(spec, start, k):
    # one capped round from a single vertex exposes S_1 through first-activation times
    g = generate(spec[0], **spec[1])
    trials = 200_000
    counts = Counter()
    for i in range(trials):
        _, first = first_activation_times(g, CobraConfig(k, start, trial_seed(SEED, i)), cap=1)
        counts[mask_of(np.flatnonzero(first == 1))] += 1
    emp = {m: c / trials for m, c in counts.items()}
    assert tv(emp, cobra_transition_distribution(g, mask_of([start]), k)) <= 0.01


def test_trivial_runs():
    k1 = generate("complete", n=1)
    assert run_cobra_cover(k1, CobraConfig()) == 0
    k2 = generate("complete", n=2)
    assert all(run_cobra_cover(k2, CobraConfig(2, 0, s)) == 1 for s in range(50))
    p3 = generate("path", n=3)
    assert run_cobra_hitting(p3, CobraConfig(2, 1, 0), 1) == 0


def test_config_validation():
    g = generate("cycle", n=5)
    with pytest.raises(InvalidParams):
        run_cobra_cover(g, CobraConfig(k=0))
    with pytest.raises(InvalidParams):
        run_cobra_cover(g, CobraConfig(start=5))
    with pytest.raises(InvalidParams):
        run_cobra_hitting(g, CobraConfig(), 7)


def test_timeout_reported_as_none():
    g = generate("path", n=40)
    assert run_cobra_hitting(g, CobraConfig(2, 0, 3), 39, cap=5) is None
    assert default_cap(10) == 64_000


def test_runs_are_deterministic_per_seed():
    g = generate("petersen")
    a = [run_cobra_cover(g, CobraConfig(2, 0, s)) for s in range(20)]
    b = [run_cobra_cover(g, CobraConfig(2, 0, s)) for s in range(20)]
    assert a == b and len(set(a)) > 1


def test_first_activation_consistent_with_hitting():
    g = generate("grid", d=2, side=4)
    for s in range(20):
        cover, first = first_activation_times(g, CobraConfig(2, 0, s))
        assert cover == first.max() and first[0] == 0
        for v in (3, 12, 24):
            assert run_cobra_hitting(g, CobraConfig(2, 0, s), v) == first[v]


def mean_se(values):
    a = np.asarray(values, dtype=float)
    return a.mean(), a.std(ddof=1) / math.sqrt(a.size)


@pytest.mark.parametrize("spec,start,target,exact", [(("path", dict(n=3)), 0, 2, 8 / 3)])
def test_hitting_mean_matches_oracle(spec, start, target, exact):
    g = generate(spec[0], **spec[1])
    m, se = mean_se([run_cobra_hitting(g, CobraConfig(2, start, trial_seed(SEED, i)), target)
                     for i in range(100_000)])
    assert abs(m - exact) <= 3 * se


def test_cover_mean_matches_oracle():
    g = generate("complete", n=3)
    for start in range(3):
        m, se = mean_se([run_cobra_cover(g, CobraConfig(2, start, trial_seed(SEED + start, i)))
                         for i in range(100_000)])
        assert abs(m - 5 / 3) <= 3 * se


def small_graphs_up_to_10():
    return [g for g in atlas(5, 2)] + [random_connected(n, n, n) for n in range(6, 11)]


def hitting_samples(g, k, trials, seed):
    """samples[u] is a (trials, n) array of first-activation rounds from u."""
    out = []
    for u in range(g.n):
        rows = [first_activation_times(g, CobraConfig(k, u, trial_seed(trial_seed(seed, u), i)))[1]
                for i in range(trials)]
        out.append(np.array(rows))
    return out


def test_k1_matches_srw_and_k2_dominated_by_srw():
    for g in small_graphs_up_to_10():
        exact = np.array([exact_hitting(srw_chain(g), [v]) for v in range(g.n)]).T
        s1 = hitting_samples(g, 1, 2000, SEED)
        s2 = hitting_samples(g, 2, 2000, SEED + 1)
        for u in range(g.n):
            m1 = s1[u].mean(axis=0)
            se1 = s1[u].std(axis=0, ddof=1) / math.sqrt(2000)
            m2 = s2[u].mean(axis=0)
            se2 = s2[u].std(axis=0, ddof=1) / math.sqrt(2000)
            for v in range(g.n):
                if u == v:
                    continue
                assert abs(m1[v] - exact[u, v]) <= 3 * se1[v], (g.name, u, v)
                assert m2[v] <= exact[u, v] + 3 * se2[v], (g.name, u, v)


# --- tracked pebble on the grid --------------------------------------------------

def test_tracked_state_validation():
    with pytest.raises(InvalidParams):
        TrackedGridState((1, 2), (3,), 10)
    with pytest.raises(InvalidParams):
        TrackedGridState((11,), (3,), 10)
    st_ = TrackedGridState((4, 7), (1, 9), 10)
    assert st_.z == (3, 2) and st_.distance == 5


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.integers(2, 8), st.integers(0, 2 ** 32 - 1), st.data(),
       st.sampled_from(["dgrid", "closest"]))
def test_tracked_step_moves_one_coordinate_inside_grid(d, side, seed, data, policy):
    pos = tuple(data.draw(st.integers(0, side)) for _ in range(d))
    target = tuple(data.draw(st.integers(0, side)) for _ in range(d))
    state = TrackedGridState(pos, target, side)
    nxt = tracked_grid_step(state, make_rng(seed), policy)
    diff = [abs(a - b) for a, b in zip(nxt.pos, pos)]
    assert sum(diff) == 1
    assert all(0 <= c <= side for c in nxt.pos)


def test_unknown_policy():
    with pytest.raises(InvalidParams):
        tracked_grid_step(TrackedGridState((1,), (3,), 5), make_rng(0), "nearest")


def test_one_dimension_decreases_three_quarters():
    f = tracked_dimension_frequencies(TrackedGridState((50,), (55,), 100), 0, 400_000, SEED)
    assert f["changed"] == 1.0
    assert f["decreased"] == pytest.approx(0.75, abs=0.005)


def test_two_step_law_one_matched_closest_policy():
    st_ = TrackedGridState((250, 250), (250, 200), 500)
    f = tracked_two_step_frequencies(st_, 1_000_000, SEED, "closest")
    assert f[2] == pytest.approx(41 / 256, abs=0.01)
    assert f[-2] == pytest.approx(49 / 256, abs=0.01)


def test_two_step_law_dgrid_policy_one_matched():
    # the selection rule that prefers the unmatched dimension
    st_ = TrackedGridState((250, 250), (250, 200), 500)
    f = tracked_two_step_frequencies(st_, 1_000_000, SEED, "dgrid")
    assert f[2] == pytest.approx(61 / 256, abs=0.003)
    assert f[-2] == pytest.approx(49 / 256, abs=0.003)


def test_two_step_law_both_nonzero():
    st_ = TrackedGridState((250, 250), (210, 200), 500)
    f = tracked_two_step_frequencies(st_, 1_000_000, SEED, "closest")
    assert f[-2] == pytest.approx(9 / 16, abs=0.003)
    assert f[2] == pytest.approx(1 / 16, abs=0.003)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_step_bounds_on_interior_states(d):
    samples = 400_000
    mid = 100
    lo_change = 1 / (2 * d - 1)
    lo_dec = 0.5 + 1 / (8 * d - 4)
    hi_inc0 = 2 / (d + 1)
    pos = (mid,) * d
    targets = [tuple(mid - 7 - 3 * i for i in range(d)),
               tuple(mid - (5 if i == 0 else 0) for i in range(d))]
    for j, target in enumerate(targets):
        st_ = TrackedGridState(pos, target, 200)
        for dim in range(d):
            f = tracked_dimension_frequencies(st_, dim, samples, trial_seed(SEED, 10 * j + dim))
            se = math.sqrt(0.25 / samples)
            if st_.z[dim] != 0:
                assert f["changed"] >= lo_change - 3 * se
                changed = f["changed"] * samples
                assert f["decreased"] / f["changed"] >= lo_dec - 3 * math.sqrt(0.25 / changed)
            else:
                assert f["increased"] <= hi_inc0 + 3 * se


def test_dgrid_step1_frequencies_d2():
    f = tracked_dimension_frequencies(TrackedGridState((250, 250), (210, 200), 500), 0,
                                      1_000_000, SEED)
    assert f["changed"] == pytest.approx(1 / 2, abs=0.003)
    assert f["decreased"] == pytest.approx(6 / 16, abs=0.003)
    assert f["increased"] == pytest.approx(2 / 16, abs=0.003)


def test_equilibrium_formula():
    assert biased_dim_equilibrium(1)(0) == pytest.approx(2 / 3)
    for d in (1, 2, 5):
        pi = biased_dim_equilibrium(d)
        assert sum(pi(j) for j in range(5000)) == pytest.approx(1, abs=1e-12)
    with pytest.raises(InvalidParams):
        biased_dim_equilibrium(0)
    with pytest.raises(InvalidParams):
        biased_dim_equilibrium(2)(-1)


def test_equilibrium_matches_long_run_occupancy():
    occ = biased_dim_occupancy(2, 2_000_000, SEED)
    pi = biased_dim_equilibrium(2)
    assert max(abs(occ[j] - pi(j)) for j in range(occ.size)) <= 0.01
