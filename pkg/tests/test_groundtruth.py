import json
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_synth.core import Dag, Dataset
from causal_synth.groundtruth import (BINARY_OPS, MIXED_FAMILIES, UNARY_OPS, UNIFORM_BOUNDS, GroundTruthSpec,
                                      StructuralEquation, benchmark_dag, draw_spec, make_benchmark, random_dag,
                                      regenerate, synthesize_dataset)
from causal_synth.hsic import hsic_test
from causal_synth.regression import nonlinear_regress
from causal_synth.rng import stream


def noise_of(values, eq):
    return values[:, eq.child] - eq.signal(values)


def test_random_dag_small():
    g = random_dag(GroundTruthSpec(5, 2), np.random.default_rng(0))
    assert len(g.edges) == 2 and g.topological_sort()


def test_random_dag_full():
    g = random_dag(GroundTruthSpec(5, 10), np.random.default_rng(1))
    assert len(g.edges) == 10
    order = g.topological_sort()
    assert all(order.index(a) < order.index(b) for a, b in g.edges)


def test_random_dag_is_seeded():
    spec = GroundTruthSpec(12, 6)
    assert random_dag(spec, np.random.default_rng(3)) == random_dag(spec, np.random.default_rng(3))


def test_spec_validation():
    with pytest.raises(ValueError):
        GroundTruthSpec(4, 7)
    with pytest.raises(ValueError):
        GroundTruthSpec(5, 2, independent_mode="gaussian")


@given(st.integers(0, 10_000))
@settings(max_examples=100, deadline=None)
def test_drawn_specs_respect_ranges(seed):
    spec = draw_spec(np.random.default_rng(seed))
    assert 5 <= spec.n_nodes <= 20 and 2 <= spec.n_edges <= spec.n_nodes // 2
    g = random_dag(spec, np.random.default_rng(seed))
    assert len(g.edges) == spec.n_edges


def test_empty_dag_gives_independent_columns():
    data = synthesize_dataset(Dag.empty(5), 1000, UNIFORM_BOUNDS, np.random.default_rng(0)).dataset
    pairs = list(combinations(range(5), 2))
    accepted = sum(hsic_test(data.values[:, i], data.values[:, j], 0.001).independent for i, j in pairs)
    assert accepted >= 0.9 * len(pairs)


def test_sine_link_residual_range():
    seed = next(s for s in range(200)
                if synthesize_dataset(Dag(2, frozenset({(0, 1)})), 5, MIXED_FAMILIES,
                                      np.random.default_rng(s)).equations[0].unary_ops == ("sin",))
    gt = synthesize_dataset(Dag(2, frozenset({(0, 1)})), 1000, MIXED_FAMILIES, np.random.default_rng(seed))
    x = gt.dataset.values
    np.testing.assert_array_equal(x[:, 1] - np.sin(x[:, 0]), noise_of(x, gt.equations[0]))
    res = nonlinear_regress(x[:, 0], x[:, 1]).residuals
    assert np.ptp(res) <= 2.2


@given(st.integers(0, 5_000), st.sampled_from([UNIFORM_BOUNDS, MIXED_FAMILIES]))
@settings(max_examples=60, deadline=None)
def test_noise_is_recovered_exactly(seed, mode):
    spec, dag = benchmark_dag(seed, 0, mode)
    gt = synthesize_dataset(dag, 200, mode, stream(seed, "t"))
    x = gt.dataset.values
    assert {eq.child for eq in gt.equations} == {j for j in range(dag.n_nodes) if dag.parents(j)}
    for eq in gt.equations:
        assert eq.parents == dag.parents(eq.child)
        nu = noise_of(x, eq)
        assert np.all(nu >= -1.0) and np.all(nu <= 1.0)
    if mode == UNIFORM_BOUNDS:
        for src in gt.sources:
            col = x[:, src.node]
            assert 5 <= src.params["low"] < src.params["high"] <= 100
            assert col.min() >= src.params["low"] - 1 and col.max() <= src.params["high"] + 1


def test_structural_equation_folds_left_to_right():
    eq = StructuralEquation(3, (0, 1, 2), ("sin", "cos", "log"), ("sub", "mul"))
    x = np.random.default_rng(0).normal(size=(10, 4))
    want = (np.sin(x[:, 0]) - np.cos(x[:, 1])) * np.log1p(np.abs(x[:, 2]))
    np.testing.assert_array_equal(eq.signal(x), want)
    with pytest.raises(ValueError):
        StructuralEquation(1, (0,), ("sin",), ("add",))


def test_domain_guards_keep_values_finite():
    x = np.array([-1e6, -1.0, 0.0, np.pi / 2, 1e6])
    for op in UNARY_OPS.values():
        assert np.all(np.isfinite(op(x)))
    assert np.abs(UNARY_OPS["tan"](np.array([np.pi / 2]))).max() <= 10
    assert set(BINARY_OPS) == {"add", "sub", "mul"}


def test_equation_tree_names_variables():
    eq = StructuralEquation(2, (0, 1), ("sqrt", "tan"), ("add",))
    tree = eq.to_tree(["a", "b", "c"])
    assert tree["args"][1] == {"noise": "uniform", "low": -1.0, "high": 1.0}
    assert tree["args"][0]["op"] == "add"
    assert tree["args"][0]["args"][1] == {"op": "tan", "args": [{"var": "b"}]}


def test_full_benchmark_size():
    assert len(make_benchmark(10, 10, 1000).entries) == 100


def test_minimal_bundle_and_manifest_round_trip(tmp_path):
    make_benchmark(2, 2, 10, seed=5, out_dir=tmp_path)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert len(manifest["dags"]) == 2
    for k in range(2):
        dag, names = Dag.from_json((tmp_path / f"dag_{k}.json").read_text())
        assert [list(e) for e in dag.sorted_edges()] == manifest["dags"][k]["edges"]
        for i in range(2):
            path = tmp_path / f"dag_{k}" / f"data_{i}.csv"
            assert regenerate(manifest, k, i).to_csv() == path.read_text()
            assert Dataset.read_csv(path).names == tuple(names)


def test_streams_do_not_depend_on_order():
    a = make_benchmark(3, 2, 20, seed=9)
    b = make_benchmark(1, 1, 20, seed=9)
    assert a.entries[0].data.dataset == b.entries[0].data.dataset
