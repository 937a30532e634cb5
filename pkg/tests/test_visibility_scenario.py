import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nsgreedy.errors import DomainError
from nsgreedy.greedy import brute_force_opt, greedy_maximize
from nsgreedy.sets import check_monotone, generalized_curvature_bruteforce
from nsgreedy.seeding import child_rng
from nsgreedy.visibility import (METHODS, BroadcastScenario, EventLog, FeedEvents,
                                 IntensityProfile, ScenarioConstants, analytic_report,
                                 constant_scenario, curvature_bound_strong, curvature_bound_weak,
                                 edge_set_hash, empirical_visibility, estimate_visibility,
                                 random_scenario, select_baseline, simulate, simulate_realization,
                                 toy_scenario, visibility_edge, visibility_objective,
                                 visibility_per_edge, xi_zeta_rho_estimates)
from nsgreedy.visibility.simulate import sample_poisson
from nsgreedy.visibility.theory import ZETA_MIN

# direct float evaluation of the two bound expressions
WEAK_2_50_10 = 0.9990635665091434
STRONG_2_50_1 = 0.9957246836982261


def const(rate):
    return IntensityProfile.constant(rate)


def one_edge(mu=0.1, gamma=1.0, K=10, t0=30.0, tf=40.0):
    return BroadcastScenario({"b": const(mu)}, {"f": const(gamma)}, [("b", "f")], {"b": 1},
                             K=K, t0=t0, tf=tf)


# -- scenario -----------------------------------------------------------------

def test_scenario_validation():
    with pytest.raises(DomainError):
        one_edge(K=0)
    with pytest.raises(DomainError):
        one_edge(t0=5.0, tf=5.0)
    with pytest.raises(DomainError):
        BroadcastScenario({"b": const(1)}, {"f": const(1)}, [("b", "g")], {"b": 1}, 1, 0, 1)
    with pytest.raises(DomainError):
        BroadcastScenario({"b": const(1)}, {"f": const(1)}, [("b", "f")], {}, 1, 0, 1)
    with pytest.raises(DomainError):
        BroadcastScenario({"b": const(1)}, {"f": const(1)}, [("b", "f")], {"b": -1}, 1, 0, 1)


def test_scenario_json_round_trip(tmp_path):
    sc = random_scenario(4)
    path = tmp_path / "sc.json"
    sc.save(path)
    back = BroadcastScenario.load(path)
    assert back.to_dict() == sc.to_dict()
    assert edge_set_hash(back, [0, 2]) == edge_set_hash(sc, [2, 0])
    assert edge_set_hash(sc, [0]) != edge_set_hash(sc, [1])
    with pytest.raises(DomainError, match="missing key"):
        BroadcastScenario.from_dict({"broadcasters": []})


def test_edge_index():
    sc = toy_scenario()
    assert sc.edge_index([("b1", "f0"), ("b0", "f0")]) == [0, 4]
    with pytest.raises(DomainError):
        sc.edge_index([("b9", "f0")])


# -- visibility of edge sets --------------------------------------------------

def test_visibility_edge_examples():
    sc = one_edge()
    assert visibility_edge(sc, [], "f") == 0.0
    steady = 10 * 10 * 0.1 / 1.1
    assert visibility_edge(sc, [0], "f") == pytest.approx(steady, rel=0.01)
    with pytest.raises(DomainError):
        visibility_edge(sc, [3], "f")


def test_two_edges_beat_one():
    sc = BroadcastScenario({"a": const(0.2), "b": const(0.5)}, {"f": const(2.0)},
                           [("a", "f"), ("b", "f")], {"a": 1, "b": 1}, K=4, t0=2.0, tf=6.0)
    both = visibility_edge(sc, [0, 1], "f")
    assert both > visibility_edge(sc, [0], "f") and both > visibility_edge(sc, [1], "f")
    shares = visibility_per_edge(sc, [0, 1])
    assert sum(shares.values()) == pytest.approx(both, rel=1e-8)


def test_objective_empty_and_matroid():
    sc = random_scenario(0)
    f, m = visibility_objective(sc)
    assert f([]) == 0.0
    assert m.rank() == sum(min(sc.budgets[i], sum(1 for b, _ in sc.candidate_edges if b == i))
                           for i in sc.broadcasters)


@pytest.mark.parametrize("seed", [0, 3, 7])
def test_objective_monotone_and_alpha_below_bounds(seed):
    sc = random_scenario(seed)
    f, _ = visibility_objective(sc)
    assert check_monotone(f)
    c = xi_zeta_rho_estimates(sc)
    assert c.zeta_ok
    alpha = generalized_curvature_bruteforce(f).alpha
    assert alpha <= c.weak_bound(sc.K)
    assert alpha <= c.strong_bound()


def test_analytic_report_csv():
    sc = random_scenario(2)
    rep = analytic_report(sc, [0, 1])
    lines = rep.to_csv().splitlines()
    assert lines[0] == "feed,edge_set_hash,method,value,n"
    assert lines[-1].startswith("total,") and len(lines) == 2 + len(sc.feeds)
    assert rep.total == pytest.approx(sum(rep.per_feed.values()))
    assert sum(rep.per_edge.values()) == pytest.approx(rep.total, rel=1e-8)
    assert 0 <= rep.total <= sc.K * (sc.tf - sc.t0) * len(sc.feeds)


# -- simulation -----------------------------------------------------------------

def test_zero_rates_give_empty_log():
    sc = one_edge(mu=0.0, gamma=0.0)
    ev = simulate_realization(sc, [0], 5)["f"]
    assert ev.times.size == 0


def test_poisson_counts_three_sigma():
    counts = [sample_poisson(const(2.0), 100.0, child_rng(s, "count")).size for s in range(1000)]
    assert abs(np.mean(counts) - 200.0) < 3 * math.sqrt(200.0 / 1000)


def test_piecewise_sampling_respects_pieces():
    prof = IntensityProfile(1.0, (0.0, 0.5), (0.0, 40.0))
    t = sample_poisson(prof, 20.0, np.random.default_rng(1))
    assert t.size > 0 and np.all(np.mod(t, 1.0) >= 0.5)
    assert np.all(np.diff(t) >= 0)


def test_simulation_deterministic_and_csv_round_trip():
    sc = random_scenario(1)
    a = simulate(sc, [0, 2, 3], seed=9, n=3)
    b = simulate(sc, [3, 2, 0], seed=9, n=3)
    assert a.to_csv() == b.to_csv()
    back = EventLog.from_csv(a.to_csv(), a.broadcaster_ids, a.feed_ids)
    assert back.to_csv() == a.to_csv()
    assert simulate(sc, [0], seed=10, n=1).to_csv() != simulate(sc, [0], seed=9, n=1).to_csv()
    with pytest.raises(DomainError):
        EventLog.from_csv("realization,feed,time\n0,f0,1.0\n")


def test_background_stream_independent_of_edges():
    sc = random_scenario(1)
    with_edges = simulate_realization(sc, range(sc.n_edges), 4)
    without = simulate_realization(sc, [], 4)
    for j in sc.feeds:
        bg = with_edges[j].times[with_edges[j].sources < 0]
        np.testing.assert_array_equal(bg, without[j].times)


def log_of(times, sources):
    return EventLog(["b"], ["f"], [{"f": FeedEvents(np.array(times), np.array(sources))}])


def test_empirical_examples():
    assert empirical_visibility(log_of([1.0, 2.0], [-1, -1]), 3, 0.0, 5.0).total == 0.0
    rep = empirical_visibility(log_of([0.5, 2.0], [-1, 0]), 1, 1.0, 5.0)
    assert rep.total == pytest.approx(3.0)
    assert rep.per_edge == {("b", "f"): pytest.approx(3.0)}
    with pytest.raises(DomainError):
        empirical_visibility(log_of([], []), 1, 2.0, 2.0)
    with pytest.raises(DomainError):
        empirical_visibility(EventLog(["b"], ["f"]), 1, 0.0, 1.0)


def test_simultaneous_events_ordered_by_source():
    log = EventLog.from_csv("realization,feed,time,source\n0,f,1.0,background\n0,f,1.0,b\n",
                            ["b"], ["f"])
    # the broadcaster post counts as arriving first, so the background post pushes it out of K=1
    assert list(log.realizations[0]["f"].sources) == [0, -1]
    assert empirical_visibility(log, 1, 0.0, 2.0).total == 0.0


def test_estimator_matches_analytic():
    sc = constant_scenario()
    u = analytic_report(sc, [0]).total
    est = estimate_visibility(sc, [0], seed=3, n=2000)
    assert abs(est.total - u) < 4 * est.stderr()
    log_rep = empirical_visibility(simulate(sc, [0], 3, 50), sc.K, sc.t0, sc.tf)
    small = estimate_visibility(sc, [0], seed=3, n=50)
    assert log_rep.total == pytest.approx(small.total, rel=1e-12)


def test_estimator_error_shrinks():
    sc = constant_scenario()
    u = analytic_report(sc, [0]).total
    errs = [np.mean([abs(estimate_visibility(sc, [0], s, n).total - u) for s in range(8)])
            for n in (20, 500)]
    assert errs[1] < errs[0]


# -- curvature bounds and constants -----------------------------------------------

def test_weak_bound_values():
    assert curvature_bound_weak(1, math.inf, 1) == pytest.approx(
        1 - 1 / (6.154 * math.e ** 2 + 1), rel=1e-15)
    assert curvature_bound_weak(2, 50, 10) == pytest.approx(WEAK_2_50_10, rel=1e-15)
    with pytest.raises(DomainError, match="warm-up"):
        curvature_bound_weak(2, ZETA_MIN, 3)
    with pytest.raises(DomainError):
        curvature_bound_weak(0.5, 100, 3)


@given(st.floats(1, 50), st.floats(1, 50), st.integers(1, 50), st.integers(1, 50))
def test_weak_bound_increasing(x1, x2, k1, k2):
    lo_x, hi_x = sorted((x1, x2))
    lo_k, hi_k = sorted((k1, k2))
    assert curvature_bound_weak(lo_x, 40, lo_k) <= curvature_bound_weak(hi_x, 40, lo_k)
    assert curvature_bound_weak(lo_x, 40, lo_k) <= curvature_bound_weak(lo_x, 40, hi_k)


def test_strong_bound_values():
    assert curvature_bound_strong(2, 50, 1) == pytest.approx(STRONG_2_50_1, rel=1e-15)
    big_rho = curvature_bound_strong(2, 50, 5.0)
    assert big_rho < 1 and big_rho == curvature_bound_strong(2, 50, 5.0)
    assert curvature_bound_strong(2, 50, 0.05) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        curvature_bound_strong(2, 50, 0.0)


def test_constants_single_edge():
    c = xi_zeta_rho_estimates(one_edge(K=10))
    assert c.xi == pytest.approx(1.1)
    assert c.rho == pytest.approx(10 / 3)
    assert c.zeta == pytest.approx((30 - 9) / 3)
    assert isinstance(c, ScenarioConstants)


def test_constants_t0_zero_violates():
    sc = one_edge(K=5, t0=0.0)
    c = xi_zeta_rho_estimates(sc)
    assert c.zeta <= -math.sqrt(4) and not c.zeta_ok
    assert c.weak_bound(5) is None and c.strong_bound() is None


def test_constants_k1_and_scaling():
    assert xi_zeta_rho_estimates(one_edge(K=1)).zeta == math.inf
    sc = random_scenario(5)
    c = xi_zeta_rho_estimates(sc)
    scaled = BroadcastScenario({i: p.scaled(3.0) for i, p in sc.broadcasters.items()},
                               {j: p.scaled(3.0) for j, p in sc.feeds.items()},
                               sc.candidate_edges, sc.budgets, sc.K, sc.t0, sc.tf)
    c3 = xi_zeta_rho_estimates(scaled)
    assert c3.xi == pytest.approx(c.xi) and c3.rho == pytest.approx(c.rho)


def test_constants_zero_background_rejected():
    sc = BroadcastScenario({"b": const(1)}, {"f": IntensityProfile(1.0, (0.0, 0.5), (1.0, 0.0))},
                           [("b", "f")], {"b": 1}, K=2, t0=1.0, tf=3.0)
    with pytest.raises(DomainError, match="xi undefined"):
        xi_zeta_rho_estimates(sc)


# -- baselines --------------------------------------------------------------------

def test_zero_budgets_select_nothing():
    sc = random_scenario(2, budget=0)
    for method in METHODS:
        assert select_baseline(sc, method, 1) == []


def test_baselines_respect_budgets_and_seed():
    sc = random_scenario(6, budget=2)
    _, m = visibility_objective(sc)
    for method in METHODS:
        chosen = select_baseline(sc, method, 4)
        assert m.is_independent(chosen)
        assert select_baseline(sc, method, 4) == chosen
    assert any(select_baseline(sc, "random", s) != select_baseline(sc, "random", 4)
               for s in range(5))
    with pytest.raises(DomainError):
        select_baseline(sc, "best")


def test_cp_prefers_quiet_feeds():
    sc = BroadcastScenario({"b": const(1.0)}, {"busy": const(9.0), "calm": const(1.0)},
                           [("b", "busy"), ("b", "calm")], {"b": 1}, K=2, t0=1.0, tf=2.0)
    assert sc.edge_ids(select_baseline(sc, "CP")) == [("b", "calm")]


def test_toy_greedy_beats_cp():
    sc = toy_scenario()
    f, m = visibility_objective(sc)
    greedy = greedy_maximize(f, m)
    cp = select_baseline(sc, "CP")
    assert greedy.final_value >= f(cp)
    # posts from b{k}'s busy quarter survive in f{k}, which goes quiet right after
    assert sorted(sc.edge_ids(greedy.selected)) == [(f"b{k}", f"f{k}") for k in range(4)]
    assert len(set(j for _, j in sc.edge_ids(cp))) == 1


@pytest.mark.parametrize("seed", [0, 1])
def test_greedy_vs_opt_on_small_scenario(seed):
    sc = random_scenario(seed)
    f, m = visibility_objective(sc)
    _, opt = brute_force_opt(f, m)
    alpha = generalized_curvature_bruteforce(f).alpha
    assert greedy_maximize(f, m).final_value >= opt / (1 + 1 / (1 - alpha))
