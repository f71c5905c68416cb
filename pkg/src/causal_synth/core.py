"""Tabular datasets and DAGs over feature indices."""

from __future__ import annotations

import csv
import heapq
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CycleError, DatasetError

VariableSet = tuple[int, ...]


def variable_set(indices: Iterable[int]) -> VariableSet:
    """Sorted, duplicate-free tuple of column indices."""
    return tuple(sorted({int(i) for i in indices}))


@dataclass(frozen=True, eq=False)
class Dataset:
    """A complete continuous table: ``values[i, j]`` is row ``i`` of attribute ``names[j]``."""

    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise DatasetError(f"expected a 2-d table, got shape {values.shape}")
        if values.shape[0] < 1:
            raise DatasetError("dataset has no rows")
        if values.shape[1] != len(names):
            raise DatasetError(f"{len(names)} names for {values.shape[1]} columns")
        if len(set(names)) != len(names):
            raise DatasetError("attribute names must be unique")
        bad = ~np.isfinite(values)
        if bad.any():
            cols = sorted({names[j] for j in np.nonzero(bad)[1]})
            raise DatasetError("non-finite values in column(s): " + ", ".join(cols))
        values.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_columns(cls, columns: dict[str, Sequence[float]]) -> Dataset:
        names = list(columns)
        return cls(tuple(names), np.column_stack([np.asarray(columns[n], dtype=float) for n in names]))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def subset(self, indices: Sequence[int]) -> Dataset:
        idx = list(indices)
        return Dataset(tuple(self.names[i] for i in idx), self.values[:, idx])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.names == other.names and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"Dataset(n_rows={self.n_rows}, names={list(self.names)})"

    # -- CSV ---------------------------------------------------------------

    @classmethod
    def read_csv(cls, path: str | Path) -> Dataset:
        with open(path, newline="") as fh:
            return cls.parse_csv(fh.read(), source=str(path))

    @classmethod
    def parse_csv(cls, text: str, source: str = "<string>") -> Dataset:
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if not rows:
            raise DatasetError(f"{source}: empty file")
        header = [h.strip() for h in rows[0]]
        data = []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != len(header):
                raise DatasetError(f"{source}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                data.append([float(v) for v in row])
            except ValueError as exc:
                raise DatasetError(f"{source}:{lineno}: {exc}") from None
        if not data:
            raise DatasetError(f"{source}: no data rows")
        return cls(tuple(header), np.array(data, dtype=float))

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.names)
        for row in self.values:
            writer.writerow([repr(float(v)) for v in row])
        return out.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over nodes ``0..n_nodes-1``; edge ``(i, j)`` means i causes j.

    Instances are immutable: :meth:`add_edge` returns a new graph.
    """

    n_nodes: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            self._check_node(i)
            self._check_node(j)
            if i == j:
                raise CycleError((i, j))
        object.__setattr__(self, "edges", edges)
        if len(self._kahn()) != self.n_nodes:
            raise CycleError(next(iter(sorted(edges))))

    def _check_node(self, i: int) -> None:
        if not 0 <= i < self.n_nodes:
            raise IndexError(f"node {i} out of range for {self.n_nodes}-node DAG")

    @classmethod
    def empty(cls, n_nodes: int) -> Dag:
        return cls(n_nodes, frozenset())

    def add_edge(self, i: int, j: int) -> Dag:
        self._check_node(i)
        self._check_node(j)
        if (i, j) in self.edges:
            return self
        if i == j or self.has_path(j, i):
            raise CycleError((i, j))
        return Dag(self.n_nodes, self.edges | {(i, j)})

    def has_path(self, src: int, dst: int) -> bool:
        if src == dst:
            return True
        children = self._children()
        seen, stack = {src}, [src]
        while stack:
            for c in children[stack.pop()]:
                if c == dst:
                    return True
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def parents(self, j: int) -> VariableSet:
        self._check_node(j)
        return variable_set(i for i, k in self.edges if k == j)

    def _children(self) -> list[list[int]]:
        children = [[] for _ in range(self.n_nodes)]
        for i, j in self.edges:
            children[i].append(j)
        return children

    def _kahn(self) -> list[int]:
        indegree = [0] * self.n_nodes
        for _, j in self.edges:
            indegree[j] += 1
        children = self._children()
        frontier = [i for i in range(self.n_nodes) if indegree[i] == 0]
        heapq.heapify(frontier)
        order = []
        while frontier:
            i = heapq.heappop(frontier)
            order.append(i)
            for c in children[i]:
                indegree[c] -= 1
                if indegree[c] == 0:
                    heapq.heappush(frontier, c)
        return order

    def topological_sort(self) -> list[int]:
        """Kahn's algorithm with a min-index frontier, so the order is deterministic."""
        return self._kahn()

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes), dtype=int)
        for i, j in self.edges:
            a[i, j] = 1
        return a

    # -- serialization -----------------------------------------------------

    def to_json(self, names: Sequence[str] | None = None) -> str:
        names = list(names) if names is not None else [str(i) for i in range(self.n_nodes)]
        if len(names) != self.n_nodes:
            raise ValueError(f"{len(names)} names for {self.n_nodes} nodes")
        return json.dumps({"nodes": names, "edges": [list(e) for e in self.sorted_edges()]}, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> tuple[Dag, list[str]]:
        obj = json.loads(text)
        names = [str(n) for n in obj["nodes"]]
        return cls(len(names), frozenset(tuple(e) for e in obj["edges"])), names

    def to_dot(self, names: Sequence[str] | None = None) -> str:
        names = list(names) if names is not None else [str(i) for i in range(self.n_nodes)]
        lines = ["digraph G {"]
        lines += [f'  n{i} [label="{name}"];' for i, name in enumerate(names)]
        lines += [f"  n{i} -> n{j};" for i, j in self.sorted_edges()]
        lines.append("}")
        return "\n".join(lines) + "\n"


def read_dag(path: str | Path) -> tuple[Dag, list[str]]:
    return Dag.from_json(Path(path).read_text())


def write_dag(dag: Dag, path: str | Path, names: Sequence[str] | None = None) -> None:
    Path(path).write_text(dag.to_json(names))

