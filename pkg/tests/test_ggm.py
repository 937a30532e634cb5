import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize

from nsgreedy.errors import DomainError
from nsgreedy.ggm import (SampleSet, TreeStructure, chain_covariance, edge_error, edge_weights,
                          fit_precision, forest_loglik, forest_objective, gaussian_loglik,
                          ggm_gamma_bound, greedy_tree_fit, make_tree_model, mst_baseline, nll,
                          random_tree, sample_gaussian, complete_edges)
from nsgreedy.sets import check_monotone

from oracles import has_cycle, prufer_trees, subsets


def numerical_mle(forest, S, n):
    """Max of logdet K - tr(K S) over PD K supported on the forest, by BFGS."""
    free = [(i, i) for i in range(n)] + sorted(forest)

    def build(x):
        K = np.zeros((n, n))
        for (i, j), v in zip(free, x):
            K[i, j] = K[j, i] = v
        return K

    def neg(x):
        K = build(x)
        sign, logdet = np.linalg.slogdet(K)
        if sign <= 0:
            return 1e10, np.zeros_like(x)
        grad_mat = np.linalg.inv(K) - S
        grad = np.array([grad_mat[i, j] * (1 if i == j else 2) for i, j in free])
        return -(logdet - np.trace(K @ S)), -grad

    x0 = np.array([1.0 / S[i, i] for i in range(n)] + [0.0] * len(forest))
    res = optimize.minimize(neg, x0, jac=True, method="BFGS", options={"gtol": 1e-11})
    return -res.fun


def model_samples(n, seed, N=300):
    tree = random_tree(n, seed)
    _, cov = make_tree_model(tree, seed)
    return tree, sample_gaussian(cov, N, seed)


# -- trees --------------------------------------------------------------------

def test_tree_validation_and_csv():
    t = TreeStructure(4, frozenset({(1, 0), (1, 2)}))
    assert t.sorted_edges() == [(0, 1), (1, 2)]
    assert TreeStructure.from_csv(t.to_csv(), 4) == t
    with pytest.raises(DomainError):
        TreeStructure(3, frozenset({(0, 1), (1, 2), (0, 2)}))
    with pytest.raises(DomainError):
        TreeStructure(2, frozenset({(0, 2)}))


def test_random_tree_small():
    assert random_tree(1, 0).edges == frozenset()
    assert random_tree(2, 0).edges == frozenset({(0, 1)})
    with pytest.raises(DomainError):
        random_tree(0, 0)


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_random_tree_spans(n, seed):
    t = random_tree(n, seed)
    assert len(t.edges) == n - 1 and not has_cycle(list(t.edges))


def test_random_tree_reaches_every_labelled_tree():
    seen = Counter(random_tree(4, s).edges for s in range(10_000))
    assert set(seen) == set(prufer_trees(4))
    assert len(seen) == 16


# -- models and samples -----------------------------------------------------------

def test_tree_model():
    prec, cov = make_tree_model(TreeStructure(3, frozenset()), 1)
    np.testing.assert_array_equal(prec, np.eye(3))
    prec, cov = make_tree_model(TreeStructure.chain(3), 1)
    assert prec[0, 2] == 0 and abs(cov[0, 2]) > 1e-3
    for seed in range(100):
        prec, _ = make_tree_model(random_tree(6, seed), seed)
        assert np.linalg.eigvalsh(prec).min() > 0


def test_sample_gaussian_clt_band():
    N = 4000
    hits = 0
    for seed in range(40):
        err = np.abs(sample_gaussian(np.eye(3), N, seed).cov - np.eye(3)).max()
        hits += err < 4 / math.sqrt(N)
    assert hits >= 0.95 * 40


def test_sample_gaussian_misc():
    s = sample_gaussian(np.eye(3), 1, 5)
    assert np.linalg.matrix_rank(s.cov) == 1
    assert np.array_equal(sample_gaussian(np.eye(2), 10, 3).X, sample_gaussian(np.eye(2), 10, 3).X)
    with pytest.raises(DomainError):
        sample_gaussian(np.array([[1.0, 2.0], [2.0, 1.0]]), 5, 0)
    c = sample_gaussian(np.eye(2), 50, 1, center=True)
    xc = c.X - c.X.mean(axis=0)
    np.testing.assert_allclose(c.cov, xc.T @ xc / 50)
    back = SampleSet.from_csv(s.to_csv())
    np.testing.assert_array_equal(back.X, s.X)


# -- likelihood -----------------------------------------------------------------

def test_independent_data_gives_flat_objective():
    f, _ = forest_objective(SampleSet.exact(np.eye(4), 100))
    assert all(f.value_mask(m) == 0.0 for m in range(1 << 6))


def test_degenerate_correlation_rejected():
    with pytest.raises(DomainError):
        edge_weights(SampleSet.exact(np.ones((2, 2)), 10))


def test_chain_of_three_beats_other_trees():
    s = SampleSet.exact(chain_covariance(3, 0.6), 100)
    trees = [frozenset({(0, 1), (1, 2)}), frozenset({(0, 1), (0, 2)}), frozenset({(0, 2), (1, 2)})]
    vals = [forest_loglik(t, s) for t in trees]
    assert int(np.argmax(vals)) == 0
    assert greedy_tree_fit(s) == TreeStructure.chain(3)
    assert mst_baseline(s) == TreeStructure.chain(3)


@pytest.mark.parametrize("n", [3, 4])
def test_closed_form_matches_numerical_mle(n):
    samples = sample_gaussian(make_tree_model(random_tree(n, 3), 3)[1], 40, 9)
    S, N = samples.cov, samples.N
    const = -0.5 * N * n * math.log(2 * math.pi)
    edges = complete_edges(n)
    for sub in subsets(range(len(edges))):
        forest = [edges[e] for e in sub]
        if has_cycle(forest):
            continue
        want = 0.5 * N * numerical_mle(forest, S, n) + const
        assert forest_loglik(forest, samples) == pytest.approx(want, abs=1e-4)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_fit_precision_attains_loglik(n, seed):
    tree, samples = model_samples(n, seed)
    prec = fit_precision(tree, samples)
    assert gaussian_loglik(prec, samples) == pytest.approx(forest_loglik(tree, samples), rel=1e-10)
    assert nll(tree, samples) == pytest.approx(-forest_loglik(tree, samples) / samples.N)
    cov_fit = np.linalg.inv(prec)
    for i, j in tree.edges:  # moments match on every edge clique
        assert cov_fit[i, j] == pytest.approx(samples.cov[i, j], rel=1e-9, abs=1e-12)


@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_forest_objective_monotone_and_normalised(n, seed):
    _, samples = model_samples(n, seed)
    f, m = forest_objective(samples)
    assert f([]) == 0.0
    assert check_monotone(f)
    assert np.all(edge_weights(samples) >= 0)


# -- greedy, MST and brute force --------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_greedy_matches_spanning_tree_enumeration(n):
    for seed in range(3):
        _, samples = model_samples(n, 1000 * n + seed)
        w = dict(zip(complete_edges(n), edge_weights(samples)))
        best = max(sum(w[e] for e in t) for t in prufer_trees(n))
        g = greedy_tree_fit(samples)
        assert sum(w[e] for e in g.edges) == pytest.approx(best, rel=1e-12)
        assert g == mst_baseline(samples)


def test_equal_correlations_tie_break_by_edge_id():
    cov = np.full((4, 4), 0.3) + 0.7 * np.eye(4)
    t = greedy_tree_fit(SampleSet.exact(cov, 50))
    assert t.sorted_edges() == [(0, 1), (0, 2), (0, 3)]
    assert mst_baseline(SampleSet.exact(cov, 50)) == t


def test_exact_recovery_chain():
    truth = TreeStructure.chain(10)
    ok = sum(edge_error(greedy_tree_fit(sample_gaussian(chain_covariance(10, 0.6), 20_000, s)),
                        truth) == 0 for s in range(20))
    assert ok >= 19


def test_single_vertex():
    s = sample_gaussian(np.eye(1), 20, 0)
    assert greedy_tree_fit(s).edges == frozenset()


# -- metrics ----------------------------------------------------------------------

def test_edge_error_examples():
    chain = TreeStructure.chain(4)
    assert edge_error(chain, chain) == 0
    a = TreeStructure(4, frozenset({(0, 1), (1, 2), (2, 3)}))
    b = TreeStructure(4, frozenset({(0, 2), (1, 3), (0, 3)}))
    assert edge_error(a, b) == 3
    # a star centred at a chain endpoint shares one edge with the chain,
    # one centred at an interior vertex shares two
    end_star = TreeStructure(4, frozenset({(0, 1), (0, 2), (0, 3)}))
    mid_star = TreeStructure(4, frozenset({(0, 2), (1, 2), (2, 3)}))
    assert edge_error(end_star, chain) == 2
    assert edge_error(mid_star, chain) == 1
    with pytest.raises(DomainError):
        edge_error(chain, TreeStructure.chain(3))


def test_gamma_bound():
    assert ggm_gamma_bound(2.0, 2.0) == 1.0
    assert ggm_gamma_bound(1.0, 2.0) == 0.25
    vals = [ggm_gamma_bound(L, 1.0) for L in (0.1, 0.4, 0.9)]
    assert vals == sorted(vals)
    with pytest.raises(DomainError):
        ggm_gamma_bound(3.0, 2.0)
