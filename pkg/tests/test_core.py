from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_synth.core import Dag, Dataset, read_dag, variable_set, write_dag
from causal_synth.errors import CycleError, DatasetError


def has_cycle(n, edges):
    adj = {i: [b for a, b in edges if a == i] for i in range(n)}
    state = [0] * n

    def visit(u):
        state[u] = 1
        for v in adj[u]:
            if state[v] == 1 or (state[v] == 0 and visit(v)):
                return True
        state[u] = 2
        return False

    return any(state[u] == 0 and visit(u) for u in range(n))


def test_add_edge_to_empty():
    assert Dag.empty(3).add_edge(0, 1).edges == {(0, 1)}


def test_add_edge_closing_cycle():
    g = Dag(3, frozenset({(0, 1), (1, 2)}))
    with pytest.raises(CycleError):
        g.add_edge(2, 0)


def test_add_edge_idempotent():
    g = Dag(2, frozenset({(0, 1)}))
    assert g.add_edge(0, 1) == g


@pytest.mark.parametrize("edge", [(0, 3), (-1, 1)])
def test_add_edge_rejects_bad_nodes(edge):
    with pytest.raises(IndexError):
        Dag.empty(3).add_edge(*edge)


def test_self_loop_is_a_cycle():
    with pytest.raises(CycleError):
        Dag.empty(3).add_edge(0, 0)


def test_constructor_rejects_cycles():
    with pytest.raises(CycleError):
        Dag(2, frozenset({(0, 1), (1, 0)}))


def test_topological_sort_examples():
    assert Dag(3, frozenset({(0, 1), (1, 2)})).topological_sort() == [0, 1, 2]
    assert Dag.empty(3).topological_sort() == [0, 1, 2]
    assert Dag(3, frozenset({(0, 2), (1, 2)})).topological_sort() == [0, 1, 2]


def test_topological_sort_tie_break_is_smallest_valid_order():
    g = Dag(3, frozenset({(0, 2), (1, 2)}))
    valid = [list(p) for p in permutations(range(3))
             if all(p.index(a) < p.index(b) for a, b in g.edges)]
    assert g.topological_sort() == min(valid)


def test_parents():
    g = Dag(3, frozenset({(0, 2), (1, 2)}))
    assert g.parents(2) == (0, 1)
    assert g.parents(0) == ()
    with pytest.raises(IndexError):
        g.parents(3)


@st.composite
def edge_sequences(draw):
    n = draw(st.integers(1, 8))
    pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1])
    return n, draw(st.lists(pairs, max_size=30))


@given(edge_sequences())
@settings(max_examples=200, deadline=None)
def test_random_insertions_stay_acyclic(case):
    n, seq = case
    g = Dag.empty(n)
    for i, j in seq:
        try:
            g = g.add_edge(i, j)
        except CycleError:
            assert has_cycle(n, set(g.edges) | {(i, j)})
    assert not has_cycle(n, g.edges)
    order = g.topological_sort()
    assert sorted(order) == list(range(n))
    pos = {v: k for k, v in enumerate(order)}
    assert all(pos[a] < pos[b] for a, b in g.edges)
    for j in range(n):
        assert set(g.parents(j)) == {a for a, b in g.edges if b == j}


def test_variable_set_sorts_and_dedups():
    assert variable_set([3, 1, 3, 2]) == (1, 2, 3)


def test_dataset_validation():
    with pytest.raises(DatasetError):
        Dataset(("a", "a"), np.zeros((2, 2)))
    with pytest.raises(DatasetError):
        Dataset(("a",), np.array([[np.nan]]))
    with pytest.raises(DatasetError):
        Dataset(("a",), np.zeros((0, 1)))
    with pytest.raises(DatasetError):
        Dataset(("a", "b"), np.zeros((3, 3)))


def test_dataset_is_read_only():
    d = Dataset(("a",), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        d.values[0, 0] = 1.0


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    d = Dataset(("x", "y z"), rng.normal(size=(5, 2)))
    p = tmp_path / "d.csv"
    d.write_csv(p)
    assert Dataset.read_csv(p) == d


@pytest.mark.parametrize("text", ["a,b\n1,2\n3\n", "a,b\n1,x\n", "a,b\n1,nan\n", "", "a,b\n"])
def test_malformed_csv(text):
    with pytest.raises(DatasetError):
        Dataset.parse_csv(text)


def test_malformed_csv_reports_line():
    with pytest.raises(DatasetError, match=r"f.csv:3"):
        Dataset.parse_csv("a,b\n1,2\n3,oops\n", source="f.csv")


def test_dag_json_round_trip(tmp_path):
    g = Dag(3, frozenset({(0, 2), (1, 2)}))
    write_dag(g, tmp_path / "g.json", ["a", "b", "c"])
    back, names = read_dag(tmp_path / "g.json")
    assert back == g and names == ["a", "b", "c"]


def test_dot_export_lists_edges():
    dot = Dag(2, frozenset({(0, 1)})).to_dot(["u", "v"])
    assert "n0 -> n1;" in dot and 'label="u"' in dot
