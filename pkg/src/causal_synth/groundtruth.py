"""Random ground-truth DAGs and datasets generated from known structural equations."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Dag, Dataset
from .rng import stream

UNIFORM_BOUNDS = "uniform-random-bounds"
MIXED_FAMILIES = "mixed-families"
INDEPENDENT_MODES = (UNIFORM_BOUNDS, MIXED_FAMILIES)

SOURCE_BOUNDS = (5.0, 100.0)
TAN_CLAMP = 10.0


def _sqrt(x):
    return np.sqrt(np.abs(x))


def _log(x):
    return np.log1p(np.abs(x))


def _tan(x):
    return np.clip(np.tan(x), -TAN_CLAMP, TAN_CLAMP)


UNARY_OPS = {"sin": np.sin, "cos": np.cos, "sqrt": _sqrt, "log": _log, "tan": _tan}
BINARY_OPS = {"add": np.add, "sub": np.subtract, "mul": np.multiply}
SOURCE_FAMILIES = ("uniform", "normal", "exponential", "lognormal", "chisquare", "beta")


@dataclass(frozen=True)
class GroundTruthSpec:
    n_nodes: int
    n_edges: int
    independent_mode: str = UNIFORM_BOUNDS
    seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError("need at least two nodes")
        if not 0 <= self.n_edges <= self.n_nodes * (self.n_nodes - 1) // 2:
            raise ValueError(f"{self.n_edges} edges impossible on {self.n_nodes} nodes")
        if self.independent_mode not in INDEPENDENT_MODES:
            raise ValueError(f"unknown independent mode {self.independent_mode!r}")


def draw_spec(rng: np.random.Generator, independent_mode: str = UNIFORM_BOUNDS, seed: int = 0) -> GroundTruthSpec:
    """Node count in [5, 20], edge count in [2, n_nodes // 2]."""
    n_nodes = int(rng.integers(5, 21))
    n_edges = int(rng.integers(2, n_nodes // 2 + 1))
    return GroundTruthSpec(n_nodes, n_edges, independent_mode, seed)


@dataclass(frozen=True)
class StructuralEquation:
    """``child = fold(combiner_ops, [unary_ops[k](parents[k])]) + U(-1, 1)``, folded left to right."""

    child: int
    parents: tuple[int, ...]
    unary_ops: tuple[str, ...]
    combiner_ops: tuple[str, ...]

    def __post_init__(self):
        if len(self.unary_ops) != len(self.parents) or len(self.combiner_ops) != len(self.parents) - 1:
            raise ValueError("need one unary op per parent and one combiner between consecutive parents")

    def signal(self, values: np.ndarray) -> np.ndarray:
        """Noise-free part of the child, computed from the parent columns of ``values``."""
        acc = UNARY_OPS[self.unary_ops[0]](values[:, self.parents[0]])
        for op, unary, p in zip(self.combiner_ops, self.unary_ops[1:], self.parents[1:]):
            acc = BINARY_OPS[op](acc, UNARY_OPS[unary](values[:, p]))
        return acc

    def to_tree(self, names: Sequence[str] | None = None) -> dict:
        def var(p):
            return {"var": names[p] if names else p}

        tree = {"op": self.unary_ops[0], "args": [var(self.parents[0])]}
        for op, unary, p in zip(self.combiner_ops, self.unary_ops[1:], self.parents[1:]):
            tree = {"op": op, "args": [tree, {"op": unary, "args": [var(p)]}]}
        return {"op": "add", "args": [tree, {"noise": "uniform", "low": -1.0, "high": 1.0}]}


@dataclass(frozen=True)
class SourceSpec:
    node: int
    family: str
    params: dict = field(default_factory=dict)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        p = self.params
        if self.family == "uniform":
            return rng.uniform(p["low"], p["high"], n)
        if self.family == "normal":
            return rng.normal(p["loc"], p["scale"], n)
        if self.family == "exponential":
            return rng.exponential(p["scale"], n)
        if self.family == "lognormal":
            return rng.lognormal(p["mean"], p["sigma"], n)
        if self.family == "chisquare":
            return rng.chisquare(p["df"], n)
        if self.family == "beta":
            return p["scale"] * rng.beta(p["a"], p["b"], n)
        raise ValueError(f"unknown source family {self.family!r}")


def _draw_source(node: int, mode: str, rng: np.random.Generator) -> SourceSpec:
    if mode == UNIFORM_BOUNDS:
        lo, hi = sorted(rng.uniform(*SOURCE_BOUNDS, size=2))
        return SourceSpec(node, "uniform", {"low": float(lo), "high": float(hi)})
    family = SOURCE_FAMILIES[int(rng.integers(len(SOURCE_FAMILIES)))]
    if family == "uniform":
        lo = float(rng.uniform(-5, 5))
        params = {"low": lo, "high": lo + float(rng.uniform(1, 10))}
    elif family == "normal":
        params = {"loc": float(rng.uniform(-5, 5)), "scale": float(rng.uniform(0.5, 3))}
    elif family == "exponential":
        params = {"scale": float(rng.uniform(0.5, 3))}
    elif family == "lognormal":
        params = {"mean": float(rng.uniform(0, 1)), "sigma": float(rng.uniform(0.25, 0.75))}
    elif family == "chisquare":
        params = {"df": int(rng.integers(1, 11))}
    else:
        params = {"a": float(rng.uniform(0.5, 5)), "b": float(rng.uniform(0.5, 5)), "scale": float(rng.uniform(1, 10))}
    return SourceSpec(node, family, params)


def random_dag(spec: GroundTruthSpec, rng: np.random.Generator) -> Dag:
    """Sample ``spec.n_edges`` distinct node pairs, oriented along a random permutation."""
    n = spec.n_nodes
    position = np.empty(n, dtype=int)
    position[rng.permutation(n)] = np.arange(n)
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < spec.n_edges:
        a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
        chosen.add((a, b) if position[a] < position[b] else (b, a))
    return Dag(n, frozenset(chosen))


@dataclass
class GroundTruthData:
    dataset: Dataset
    equations: list[StructuralEquation]
    sources: list[SourceSpec]


def synthesize_dataset(
    dag: Dag, n_rows: int, independent_mode: str, rng: np.random.Generator, names: Sequence[str] | None = None
) -> GroundTruthData:
    """Generate every column in topological order; each one gets U(-1, 1) additive noise."""
    if n_rows < 1:
        raise ValueError("n_rows must be >= 1")
    if independent_mode not in INDEPENDENT_MODES:
        raise ValueError(f"unknown independent mode {independent_mode!r}")
    names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(dag.n_nodes))
    values = np.zeros((n_rows, dag.n_nodes))
    equations, sources = [], []
    for j in dag.topological_sort():
        parents = dag.parents(j)
        if not parents:
            src = _draw_source(j, independent_mode, rng)
            sources.append(src)
            values[:, j] = src.sample(n_rows, rng) + rng.uniform(-1.0, 1.0, n_rows)
            continue
        unary = tuple(str(u) for u in rng.choice(list(UNARY_OPS), size=len(parents)))
        combiners = tuple(str(c) for c in rng.choice(list(BINARY_OPS), size=len(parents) - 1))
        eq = StructuralEquation(j, parents, unary, combiners)
        equations.append(eq)
        values[:, j] = eq.signal(values) + rng.uniform(-1.0, 1.0, n_rows)
    return GroundTruthData(Dataset(names, values), equations, sources)


# -- benchmark bundles -------------------------------------------------------


@dataclass
class BenchmarkEntry:
    dag_index: int
    dataset_index: int
    dag: Dag
    data: GroundTruthData


@dataclass
class Benchmark:
    seed: int
    n_rows: int
    specs: list[GroundTruthSpec]
    dags: list[Dag]
    entries: list[BenchmarkEntry]

    def manifest(self) -> dict:
        dags = []
        for k, (spec, dag) in enumerate(zip(self.specs, self.dags)):
            datasets = []
            for e in self.entries:
                if e.dag_index != k:
                    continue
                names = e.data.dataset.names
                datasets.append({
                    "index": e.dataset_index,
                    "file": f"dag_{k}/data_{e.dataset_index}.csv",
                    "stream": ["benchmark", "data", k, e.dataset_index],
                    "sources": [asdict(s) for s in e.data.sources],
                    "equations": [
                        {"child": eq.child, "parents": list(eq.parents), "unary_ops": list(eq.unary_ops),
                         "combiner_ops": list(eq.combiner_ops), "tree": eq.to_tree(names)}
                        for eq in e.data.equations
                    ],
                })
            dags.append({
                "index": k,
                "file": f"dag_{k}.json",
                "stream": ["benchmark", "dag", k],
                "spec": asdict(spec),
                "edges": [list(edge) for edge in dag.sorted_edges()],
                "datasets": datasets,
            })
        return {"seed": self.seed, "n_rows": self.n_rows, "dags": dags}

    def write(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for k, dag in enumerate(self.dags):
            names = [f"x{i}" for i in range(dag.n_nodes)]
            (out / f"dag_{k}.json").write_text(dag.to_json(names))
            (out / f"dag_{k}").mkdir(exist_ok=True)
        for e in self.entries:
            e.data.dataset.write_csv(out / f"dag_{e.dag_index}" / f"data_{e.dataset_index}.csv")
        (out / "manifest.json").write_text(json.dumps(self.manifest(), indent=2, sort_keys=True) + "\n")
        return out


def benchmark_dag(seed: int, k: int, independent_mode: str = UNIFORM_BOUNDS) -> tuple[GroundTruthSpec, Dag]:
    rng = stream(seed, "benchmark", "dag", k)
    spec = draw_spec(rng, independent_mode, seed)
    return spec, random_dag(spec, rng)


def benchmark_dataset(seed: int, k: int, i: int, spec: GroundTruthSpec, dag: Dag, n_rows: int) -> GroundTruthData:
    return synthesize_dataset(dag, n_rows, spec.independent_mode, stream(seed, "benchmark", "data", k, i))


def make_benchmark(
    n_dags: int,
    datasets_per_dag: int,
    n_rows: int,
    seed: int = 0,
    independent_mode: str = UNIFORM_BOUNDS,
    out_dir: str | Path | None = None,
) -> Benchmark:
    """``n_dags`` random DAGs with ``datasets_per_dag`` datasets each, optionally written to disk.

    Each DAG and each dataset draws from its own named stream, so any single
    piece can be regenerated from the seed recorded in the manifest.
    """
    if n_dags < 1 or datasets_per_dag < 1 or n_rows < 1:
        raise ValueError("counts must be positive")
    specs, dags, entries = [], [], []
    for k in range(n_dags):
        spec, dag = benchmark_dag(seed, k, independent_mode)
        specs.append(spec)
        dags.append(dag)
        for i in range(datasets_per_dag):
            entries.append(BenchmarkEntry(k, i, dag, benchmark_dataset(seed, k, i, spec, dag, n_rows)))
    bench = Benchmark(seed, n_rows, specs, dags, entries)
    if out_dir is not None:
        bench.write(out_dir)
    return bench


def regenerate(manifest: dict, k: int, i: int) -> Dataset:
    """Rebuild dataset ``i`` of DAG ``k`` from a manifest alone."""
    entry = manifest["dags"][k]
    spec = GroundTruthSpec(**entry["spec"])
    dag = Dag(spec.n_nodes, frozenset(tuple(e) for e in entry["edges"]))
    return benchmark_dataset(manifest["seed"], k, i, spec, dag, manifest["n_rows"]).dataset
