"""Additive-noise-model causal discovery, restricted to variable sets suggested by Apriori."""

from __future__ import annotations

import enum
import logging
import time
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations
from typing import Callable, Sequence

import numpy as np

from .core import Dag, Dataset, VariableSet, variable_set
from .errors import EnumerationLimitError
from .hsic import KernelBlock, hsic_blocks, kernel_block
from .mining import apriori, discretize, maximal_itemsets, variable_sets
from .regression import nonlinear_regress

log = logging.getLogger(__name__)

MAX_ENUMERATED_NODES = 5

DEFAULT_N_BINS = 10
DEFAULT_MIN_SUP = 0.05
DEFAULT_MAX_LEN = 3
DEFAULT_ALPHA = 0.001


class Outcome(enum.Enum):
    INDEPENDENT = "independent"
    U_CAUSES_V = "u->v"
    V_CAUSES_U = "v->u"
    NEITHER_CONSISTENT = "neither"
    BOTH_CONSISTENT = "both"


@dataclass(frozen=True)
class PartitionResult:
    outcome: Outcome
    p_dependence: float
    p_forward: float | None = None
    p_backward: float | None = None


class AnmTester:
    """Memoizing front end for the independence tests and regressions NCD needs.

    All keys are column indices of ``data``; one tester can be shared by every
    variable set examined during an NCDA run, so each pairwise pre-test and each
    (child, parents) regression is computed at most once.
    """

    def __init__(self, data: np.ndarray, alpha: float, block_cache_size: int = 32):
        self.data = np.asarray(data, dtype=float)
        self.alpha = alpha
        self._blocks: OrderedDict[VariableSet, KernelBlock] = OrderedDict()
        self._block_cache_size = block_cache_size
        self._pair_p: dict[tuple[int, int], float] = {}
        self._residual_p: dict[tuple, float] = {}
        self._residuals: dict[tuple[int, VariableSet], np.ndarray] = {}
        self.n_regressions = 0
        self.n_tests = 0

    def _block(self, cols: VariableSet) -> KernelBlock:
        blk = self._blocks.get(cols)
        if blk is None:
            blk = kernel_block(self.data[:, list(cols)])
            self._blocks[cols] = blk
            if len(self._blocks) > self._block_cache_size:
                self._blocks.popitem(last=False)
        else:
            self._blocks.move_to_end(cols)
        return blk

    def dependence_p(self, i: int, j: int) -> float:
        """p-value of the bivariate HSIC test of column i against column j."""
        key = (min(i, j), max(i, j))
        if key not in self._pair_p:
            self.n_tests += 1
            self._pair_p[key] = hsic_blocks(self._block((key[0],)), self._block((key[1],)), self.alpha).p_value
        return self._pair_p[key]

    def residuals(self, child: int, parents: VariableSet) -> np.ndarray:
        key = (child, tuple(parents))
        if key not in self._residuals:
            self.n_regressions += 1
            self._residuals[key] = nonlinear_regress(self.data[:, list(parents)], self.data[:, child]).residuals
        return self._residuals[key]

    def residual_p(self, child: int, parents: VariableSet, against: VariableSet | None = None) -> float:
        """p-value for 'residual of child regressed on parents' independent of the ``against`` block.

        ``against`` defaults to the parents themselves.
        """
        against = tuple(parents) if against is None else tuple(against)
        key = (child, tuple(parents), against)
        if key not in self._residual_p:
            self.n_tests += 1
            res = hsic_blocks(kernel_block(self.residuals(child, parents)), self._block(against), self.alpha)
            self._residual_p[key] = res.p_value
        return self._residual_p[key]


def test_partition(data: Dataset, u: Sequence[int], v: Sequence[int], alpha: float = DEFAULT_ALPHA) -> PartitionResult:
    """Classify the relation between disjoint variable blocks U and V.

    Independent when U and V pass the independence pre-test; otherwise V is
    regressed on U and U on V and each residual block is tested against its
    regressors.
    """
    u, v = variable_set(u), variable_set(v)
    if not u or not v or set(u) & set(v):
        raise ValueError("U and V must be nonempty and disjoint")
    x = data.values
    pre = hsic_blocks(kernel_block(x[:, list(u)]), kernel_block(x[:, list(v)]), alpha)
    if pre.independent:
        return PartitionResult(Outcome.INDEPENDENT, pre.p_value)

    def consistent(src, dst) -> float:
        residuals = np.column_stack(
            [nonlinear_regress(x[:, list(src)], x[:, j]).residuals for j in dst]
        )
        return hsic_blocks(kernel_block(residuals), kernel_block(x[:, list(src)]), alpha).p_value

    p_fwd, p_bwd = consistent(u, v), consistent(v, u)
    fwd, bwd = p_fwd > alpha, p_bwd > alpha
    if fwd and not bwd:
        outcome = Outcome.U_CAUSES_V
    elif bwd and not fwd:
        outcome = Outcome.V_CAUSES_U
    elif fwd and bwd:
        outcome = Outcome.BOTH_CONSISTENT
    else:
        outcome = Outcome.NEITHER_CONSISTENT
    return PartitionResult(outcome, pre.p_value, p_fwd, p_bwd)


test_partition.__test__ = False  # keep pytest from collecting it when imported


@lru_cache(maxsize=None)
def enumerate_dags(k: int) -> tuple[frozenset, ...]:
    """Every labeled DAG on ``k`` nodes as an edge set, ordered by (edge count, sorted edges).

    Each DAG is consistent with some node ordering, so orienting every subset of
    the pairs along every permutation reaches all of them.
    """
    if k > MAX_ENUMERATED_NODES:
        raise EnumerationLimitError(f"refusing to enumerate DAGs on {k} > {MAX_ENUMERATED_NODES} nodes")
    pairs = list(combinations(range(k), 2))
    seen = set()
    for perm in permutations(range(k)):
        pos = {node: r for r, node in enumerate(perm)}
        oriented = [(a, b) if pos[a] < pos[b] else (b, a) for a, b in pairs]
        for mask in range(1 << len(pairs)):
            seen.add(frozenset(e for bit, e in enumerate(oriented) if mask >> bit & 1))
    return tuple(sorted(seen, key=lambda es: (len(es), sorted(es))))


@dataclass(frozen=True)
class CandidateModel:
    """Outcome of NCD on one variable set.

    ``dag`` is over local indices ``0..len(variables)-1``; ``variables[i]`` is the
    dataset column of local node ``i``. ``edge_p_values`` maps each local edge to
    the p-value of its child's residual test.
    """

    variables: VariableSet
    dag: Dag
    accepted: bool
    test_p_values: tuple[float, ...] = ()
    edge_p_values: dict = field(default_factory=dict)

    @property
    def avg_p_value(self) -> float | None:
        if not self.test_p_values:
            return None
        return float(np.mean(self.test_p_values))

    def global_edges(self) -> list[tuple[int, int]]:
        return [(self.variables[a], self.variables[b]) for a, b in self.dag.sorted_edges()]


def _score_dag(edges: frozenset, variables: VariableSet, tester: AnmTester) -> CandidateModel | None:
    """Test one DAG over ``variables``; None when some edge joins an independent pair."""
    alpha = tester.alpha
    k = len(variables)
    for a, b in sorted(edges):
        if tester.dependence_p(variables[a], variables[b]) > alpha:
            return None
    parents = {j: tuple(sorted(a for a, b in edges if b == j)) for j in range(k)}
    sources = [j for j in range(k) if not parents[j]]

    p_values: list[float] = []
    edge_p: dict[tuple[int, int], float] = {}
    for a, b in combinations(sources, 2):
        p = tester.dependence_p(variables[a], variables[b])
        p_values.append(p)
        if p <= alpha:
            return CandidateModel(variables, Dag(k, edges), False, tuple(p_values))
    for j in range(k):
        if not parents[j]:
            continue
        p = tester.residual_p(variables[j], tuple(variables[a] for a in parents[j]))
        p_values.append(p)
        for a in parents[j]:
            edge_p[(a, j)] = p
        if p <= alpha:
            return CandidateModel(variables, Dag(k, edges), False, tuple(p_values), edge_p)
    return CandidateModel(variables, Dag(k, edges), True, tuple(p_values), edge_p)


def ncd(
    data: Dataset,
    alpha: float = DEFAULT_ALPHA,
    variables: Sequence[int] | None = None,
    tester: AnmTester | None = None,
) -> CandidateModel:
    """Search all DAGs over ``variables`` (default: every column) for the best ANM fit.

    A DAG is accepted when each non-source node's regression residual is
    independent of its parents, the source nodes are pairwise independent and
    every edge joins a dependent pair. Among accepted non-empty DAGs the one
    with the highest mean p-value wins (ties: fewer edges, then edge order). A
    winner whose full reversal is also accepted is direction-ambiguous and is
    passed over, mirroring the "both consistent" outcome of the pairwise test.
    """
    variables = variable_set(range(data.n_features) if variables is None else variables)
    k = len(variables)
    if k < 2:
        raise ValueError("NCD needs at least two variables")
    dags = enumerate_dags(k)
    tester = tester or AnmTester(data.values, alpha)

    scored: dict[frozenset, CandidateModel | None] = {}

    def score(edges):
        if edges not in scored:
            scored[edges] = _score_dag(edges, variables, tester)
        return scored[edges]

    accepted = []
    for rank, edges in enumerate(dags):
        if not edges:
            continue
        model = score(edges)
        if model is not None and model.accepted:
            accepted.append((-model.avg_p_value, len(edges), rank, model))
    accepted.sort(key=lambda t: t[:3])
    for *_, model in accepted:
        reverse = score(frozenset((b, a) for a, b in model.dag.edges))
        if reverse is not None and reverse.accepted:
            continue
        return model
    return CandidateModel(variables, Dag.empty(k), False)


def update_graph(graph: Dag, candidate: CandidateModel) -> Dag:
    """Merge an accepted candidate's edges, strongest p-value first, skipping cycle-closing ones."""
    if not candidate.accepted:
        raise ValueError("only accepted candidate models can be merged")
    local = sorted(candidate.dag.edges, key=lambda e: (-candidate.edge_p_values.get(e, 0.0), e))
    for a, b in local:
        i, j = candidate.variables[a], candidate.variables[b]
        if (i, j) in graph.edges:
            continue
        if graph.has_path(j, i):
            log.info("skipping edge %d->%d: would close a cycle", i, j)
            continue
        graph = graph.add_edge(i, j)
    return graph


def prune_mediated(graph: Dag, tester: AnmTester) -> tuple[Dag, list[tuple[int, int, int]]]:
    """Drop edges i->j that a third column k screens off.

    An edge is dropped when some k is dependent on both i and j, and regressing
    j on k alone leaves a residual independent of (i, k). That pattern fits a
    mediator (i->k->j) or a common cause (k->i, k->j) that never shared an
    itemset with the pair. Returns the pruned graph and (i, j, k) triples.
    """
    alpha = tester.alpha
    m = graph.n_nodes
    kept, dropped = set(graph.edges), []
    for i, j in graph.sorted_edges():
        for k in range(m):
            if k in (i, j):
                continue
            if tester.dependence_p(i, k) > alpha or tester.dependence_p(k, j) > alpha:
                continue
            if tester.residual_p(j, (k,), against=(min(i, k), max(i, k))) > alpha:
                kept.discard((i, j))
                dropped.append((i, j, k))
                break
    return Dag(m, frozenset(kept)), dropped


@dataclass
class DiscoveryReport:
    dag: Dag
    candidates: list[CandidateModel]
    n_itemsets: int
    n_maximal: int
    apriori_seconds: float
    ncd_seconds: float
    n_regressions: int = 0
    n_tests: int = 0
    pruned: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def n_ncd_calls(self) -> int:
        return len(self.candidates)


def discover(
    data: Dataset,
    n_bins: int = DEFAULT_N_BINS,
    min_sup: float = DEFAULT_MIN_SUP,
    max_len: int = DEFAULT_MAX_LEN,
    alpha: float = DEFAULT_ALPHA,
    on_candidate: Callable[[CandidateModel], None] | None = None,
    prune: bool = False,
) -> DiscoveryReport:
    """NCDA: discretize, mine maximal itemsets, run NCD once per distinct variable set, merge.

    ``prune=True`` adds a post-pass (see ``prune_mediated``) that is not part of
    the base algorithm; it is off by default.
    """
    t0 = time.perf_counter()
    db = discretize(data, n_bins)
    frequents = apriori(db, min_sup, max_len)
    maximals = maximal_itemsets(frequents)
    vsets = variable_sets(maximals)
    t1 = time.perf_counter()

    graph = Dag.empty(data.n_features)
    tester = AnmTester(data.values, alpha)
    candidates = []
    for vs in vsets:
        model = ncd(data, alpha, variables=vs, tester=tester)
        candidates.append(model)
        if on_candidate is not None:
            on_candidate(model)
        if model.accepted:
            graph = update_graph(graph, model)
    pruned = []
    if prune:
        graph, pruned = prune_mediated(graph, tester)
    t2 = time.perf_counter()
    return DiscoveryReport(
        graph, candidates, len(frequents), len(maximals), t1 - t0, t2 - t1,
        tester.n_regressions, tester.n_tests, pruned,
    )


def ncda(
    data: Dataset,
    n_bins: int = DEFAULT_N_BINS,
    min_sup: float = DEFAULT_MIN_SUP,
    max_len: int = DEFAULT_MAX_LEN,
    alpha: float = DEFAULT_ALPHA,
    prune: bool = False,
) -> Dag:
    return discover(data, n_bins, min_sup, max_len, alpha, prune=prune).dag


def candidates_csv(candidates: Sequence[CandidateModel], names: Sequence[str]) -> str:
    lines = ["variables,edges,accepted,avg_p"]
    for c in candidates:
        vs = ";".join(names[i] for i in c.variables)
        es = ";".join(f"{names[i]}->{names[j]}" for i, j in c.global_edges())
        avg = "" if c.avg_p_value is None else repr(c.avg_p_value)
        lines.append(f"{vs},{es},{str(c.accepted).lower()},{avg}")
    return "\n".join(lines) + "\n"
