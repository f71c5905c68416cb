import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from causal_synth.core import Dag, Dataset
from causal_synth.errors import DegenerateColumnError, NodeCountMismatch, TooFewReferenceRows
from causal_synth.evaluation import (KDE_BANDWIDTHS, correlation_baseline, distribution_error, edge_metrics,
                                     hoeffding_d, kde_fit, lof_report, lof_scores, random_baseline)

from oracles import hoeffding_u_statistic, kde_cv_scores, lof_breunig


def test_identical_graphs_score_one():
    g = Dag(4, frozenset({(0, 1), (1, 2), (0, 3)}))
    m = edge_metrics(g, g)
    assert (m.precision, m.recall, m.accuracy, m.f1) == (1, 1, 1, 1)


def test_two_node_perfect_match():
    g = Dag(2, frozenset({(0, 1)}))
    m = edge_metrics(g, g)
    assert (m.tp, m.tn, m.fp, m.fn) == (1, 1, 0, 0)
    assert (m.accuracy, m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0, 1.0)


def test_reversed_edge():
    m = edge_metrics(Dag(2, frozenset({(0, 1)})), Dag(2, frozenset({(1, 0)})))
    assert (m.tp, m.fp, m.fn, m.tn) == (0, 1, 1, 0)
    assert m.accuracy == 0 and m.f1 == 0


def test_empty_prediction_has_zero_precision():
    m = edge_metrics(Dag(3, frozenset({(0, 1)})), Dag.empty(3))
    assert m.precision == 0 and m.recall == 0 and m.f1 == 0


def test_node_count_mismatch():
    with pytest.raises(NodeCountMismatch):
        edge_metrics(Dag.empty(2), Dag.empty(3))


def test_symmetric_matrix_prediction():
    truth = Dag(3, frozenset({(0, 1)}))
    pred = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=bool)
    m = edge_metrics(truth, pred)
    assert (m.tp, m.fp, m.fn) == (1, 1, 0)


@st.composite
def adjacency(draw, n):
    a = draw(arrays(np.bool_, (n, n)))
    np.fill_diagonal(a, False)
    return a


@given(st.integers(2, 6).flatmap(lambda n: st.tuples(adjacency(n), adjacency(n))))
def test_swapping_arguments_swaps_fp_and_fn(pair):
    a, b = pair
    m, r = edge_metrics(a, b), edge_metrics(b, a)
    n = a.shape[0]
    assert (m.tp, m.tn, m.fp, m.fn) == (r.tp, r.tn, r.fn, r.fp)
    assert m.tp + m.tn + m.fp + m.fn == n * (n - 1)
    for v in (m.accuracy, m.precision, m.recall, m.f1):
        assert 0 <= v <= 1


@pytest.mark.parametrize("seed", range(6))
def test_hoeffding_matches_u_statistic(seed):
    rng = np.random.default_rng(seed)
    n = 7 + seed % 2
    x = rng.normal(size=n)
    y = x * (seed % 3 - 1) + rng.normal(size=n)
    assert hoeffding_d(x, y) == pytest.approx(hoeffding_u_statistic(x, y), abs=1e-12)


def test_hoeffding_monotone_is_one():
    x = np.arange(30.0)
    assert hoeffding_d(x, np.exp(x / 5)) == pytest.approx(1.0)


def test_linear_pair_flagged_by_every_baseline():
    rng = np.random.default_rng(0)
    x = rng.normal(size=300)
    data = Dataset(("x", "y", "z"), np.column_stack([x, 2 * x + 0.3 * rng.normal(size=300), rng.normal(size=300)]))
    for method in ("pearson", "spearman", "hoeffding"):
        adj = correlation_baseline(data, method)
        assert adj[0, 1] and adj[1, 0]
        assert np.array_equal(adj, adj.T) and not adj.diagonal().any()


def test_symmetric_nonmonotone_pair_flagged_by_hoeffding():
    rng = np.random.default_rng(1)
    x = rng.uniform(0, 1, 500)
    y = np.cos(2 * np.pi * x) + 0.05 * rng.normal(size=500)
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.15
    assert correlation_baseline(Dataset(("x", "y"), np.column_stack([x, y])), "hoeffding")[0, 1]


def test_sine_pair_flagged_by_hoeffding():
    rng = np.random.default_rng(2)
    x = rng.uniform(0, 1, 500)
    data = Dataset(("x", "y"), np.column_stack([x, np.sin(4 * np.pi * x)]))
    assert correlation_baseline(data, "hoeffding")[0, 1]


def test_pearson_false_positive_rate_on_independent_pairs():
    rng = np.random.default_rng(3)
    flags = sum(correlation_baseline(Dataset(("a", "b"), rng.normal(size=(500, 2))), "pearson")[0, 1]
                for _ in range(400))
    # binomial(400, 0.05): mean 20, sd about 4.4
    assert 7 <= flags <= 33


def test_unknown_baseline():
    with pytest.raises(ValueError):
        correlation_baseline(Dataset(("a", "b"), np.eye(2)), "kendall")


def test_kde_density_near_true_normal():
    x = np.random.default_rng(2).normal(size=2000)
    kde = kde_fit(x)
    truth = 1 / np.sqrt(2 * np.pi)
    assert abs(kde.pdf([0.0])[0] - truth) < 0.25 * truth


def test_kde_integrates_to_one():
    x = np.random.default_rng(3).normal(size=500)
    kde = kde_fit(x)
    s = x.std()
    grid = np.linspace(x.min() - 10 * s - 10 * kde.bandwidth, x.max() + 10 * s + 10 * kde.bandwidth, 40_001)
    assert abs(np.trapezoid(kde.pdf(grid), grid) - 1) < 1e-3


def test_kde_bandwidth_maximizes_cv_likelihood():
    x = np.random.default_rng(4).gamma(2.0, 3.0, 120)
    kde = kde_fit(x)
    oracle = kde_cv_scores(x, KDE_BANDWIDTHS)
    np.testing.assert_allclose(kde.cv_scores, oracle, rtol=1e-9)
    assert kde.bandwidth == KDE_BANDWIDTHS[int(np.argmax(oracle))]
    assert all(kde.cv_scores[KDE_BANDWIDTHS.tolist().index(kde.bandwidth)] >= s for s in kde.cv_scores)


def test_kde_is_deterministic():
    x = np.random.default_rng(5).normal(size=300)
    assert kde_fit(x).bandwidth == kde_fit(x.copy()).bandwidth


def test_kde_rejects_bad_input():
    with pytest.raises(DegenerateColumnError):
        kde_fit(np.ones(50))
    with pytest.raises(ValueError):
        kde_fit(np.arange(10.0))


def _table(seed, n=300):
    rng = np.random.default_rng(seed)
    return Dataset(("a", "b"), np.column_stack([rng.normal(size=n), rng.exponential(size=n)]))


def test_identical_tables_have_zero_error():
    t = _table(6)
    assert distribution_error(t, t, np.random.default_rng(0)) == (0.0, 0.0)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**16))
def test_identity_property(seed):
    t = _table(seed, 60)
    assert distribution_error(t, t, np.random.default_rng(seed)) == (0.0, 0.0)


def test_disjoint_support_has_large_error():
    rng = np.random.default_rng(7)
    real = Dataset(("a",), rng.normal(size=(500, 1)))
    synth = Dataset(("a",), rng.uniform(20, 30, size=(500, 1)))
    sse, rmse = distribution_error(real, synth, np.random.default_rng(0))
    assert sse > 0.1
    assert rmse == pytest.approx(np.sqrt(sse / 1000))


def test_distribution_error_column_mismatch():
    with pytest.raises(ValueError):
        distribution_error(_table(0), Dataset(("x", "y"), _table(0).values), np.random.default_rng(0))


@pytest.mark.parametrize("seed,n", [(0, 50), (1, 120), (2, 200)])
def test_lof_matches_definition(seed, n):
    rng = np.random.default_rng(seed)
    ref = rng.normal(size=(n, 3))
    ref[: n // 5] += 4
    queries = np.vstack([rng.normal(size=(20, 3)) * 2, ref[:3]])
    k = min(30, n // 3)
    np.testing.assert_allclose(lof_scores(ref, queries, k), lof_breunig(ref, queries, k), rtol=1e-9, atol=1e-12)


def test_duplicate_of_dense_row_is_inlier():
    real = Dataset(("a", "b"), np.random.default_rng(8).normal(size=(400, 2)))
    synth = Dataset(("a", "b"), real.values[np.argsort(np.abs(real.values).sum(1))[:1]])
    assert lof_report(real, synth).scores[0] <= 1.05


def test_far_row_is_outlier():
    real = Dataset(("a", "b"), np.random.default_rng(9).normal(size=(400, 2)))
    synth = Dataset(("a", "b"), np.array([[100.0, 100.0], [0.0, 0.0]]))
    rep = lof_report(real, synth)
    assert rep.scores[0] > 10 and rep.n_outliers >= 1
    assert np.all(rep.scores > 0) and rep.n_outliers <= 2


def test_lof_needs_reference_rows():
    with pytest.raises(TooFewReferenceRows):
        lof_report(_table(0, 30), _table(1, 30))


def test_random_baseline():
    real = _table(10)
    a = random_baseline(real, 500, np.random.default_rng(1))
    b = random_baseline(real, 500, np.random.default_rng(1))
    assert a == b and a.names == real.names and a.n_rows == 500
    assert np.all(a.values >= real.values.min(0)) and np.all(a.values <= real.values.max(0))
