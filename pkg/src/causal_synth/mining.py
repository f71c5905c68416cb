"""Equal-width discretization and Apriori frequent/maximal itemset mining."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Hashable, NamedTuple, Sequence

import numpy as np

from .core import Dataset, VariableSet, variable_set
from .errors import DegenerateColumnError


class Item(NamedTuple):
    feature: int
    bin: int


@dataclass(frozen=True)
class TransactionDb:
    """One item set per row. ``bin_edges`` is set when the db comes from :func:`discretize`."""

    transactions: tuple[frozenset, ...]
    bin_edges: tuple[np.ndarray, ...] | None = None
    names: tuple[str, ...] | None = None

    @classmethod
    def from_lists(cls, rows: Sequence[Sequence[Hashable]]) -> TransactionDb:
        return cls(tuple(frozenset(r) for r in rows))

    def __len__(self):
        return len(self.transactions)

    def support(self, items) -> float:
        s = frozenset(items)
        return sum(1 for t in self.transactions if s <= t) / len(self.transactions)

    def render_item(self, item: Item) -> str:
        if self.bin_edges is None or self.names is None:
            return str(item)
        edges = self.bin_edges[item.feature]
        close = "]" if item.bin == len(edges) - 2 else ")"
        return f"{self.names[item.feature]}_[{edges[item.bin]:g},{edges[item.bin + 1]:g}{close}"


@dataclass(frozen=True)
class ItemSet:
    items: tuple
    support: float

    def __len__(self):
        return len(self.items)


def discretize(dataset: Dataset, n_bins: int) -> TransactionDb:
    """Map every value to one of ``n_bins`` equal-width bins spanning its column's range.

    Bins are left-closed except the last, which also includes the column maximum.
    """
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    values = dataset.values
    lo, hi = values.min(axis=0), values.max(axis=0)
    constant = [dataset.names[j] for j in range(dataset.n_features) if hi[j] <= lo[j]]
    if constant:
        raise DegenerateColumnError(constant)

    edges = tuple(np.linspace(lo[j], hi[j], n_bins + 1) for j in range(dataset.n_features))
    bins = np.column_stack(
        [np.searchsorted(edges[j][1:-1], values[:, j], side="right") for j in range(dataset.n_features)]
    )
    transactions = tuple(
        frozenset(Item(j, int(b)) for j, b in enumerate(row)) for row in bins
    )
    return TransactionDb(transactions, edges, dataset.names)


def apriori(db: TransactionDb, min_sup: float, max_len: int) -> list[ItemSet]:
    """All itemsets with support >= ``min_sup`` and at most ``max_len`` items.

    Level-wise search: candidates of size k+1 come from joining frequent k-itemsets
    that share their first k-1 (sorted) items, and are discarded unless every
    k-subset is frequent.
    """
    if not 0 < min_sup <= 1:
        raise ValueError(f"min_sup must lie in (0, 1], got {min_sup}")
    n = len(db)
    if n == 0 or max_len < 1:
        return []
    min_count = math.ceil(min_sup * n - 1e-9)

    items = sorted({i for t in db.transactions for i in t})
    col = {it: k for k, it in enumerate(items)}
    incidence = np.zeros((len(items), n), dtype=bool)
    for r, t in enumerate(db.transactions):
        for it in t:
            incidence[col[it], r] = True

    result: list[ItemSet] = []
    masks: dict[tuple, np.ndarray] = {}
    for it in items:
        count = int(incidence[col[it]].sum())
        if count >= min_count:
            masks[(it,)] = incidence[col[it]]
            result.append(ItemSet((it,), count / n))

    level = sorted(masks)
    size = 1
    while level and size < max_len:
        frequent = set(level)
        next_masks: dict[tuple, np.ndarray] = {}
        for a_idx, a in enumerate(level):
            for b in level[a_idx + 1:]:
                if a[:-1] != b[:-1]:
                    break
                cand = a + (b[-1],)
                if any(sub not in frequent for sub in combinations(cand, size)):
                    continue
                mask = masks[a] & incidence[col[b[-1]]]
                count = int(mask.sum())
                if count >= min_count:
                    next_masks[cand] = mask
                    result.append(ItemSet(cand, count / n))
        masks = next_masks
        level = sorted(next_masks)
        size += 1
    return result


def maximal_itemsets(frequents: Sequence[ItemSet]) -> list[ItemSet]:
    """Itemsets not strictly contained in any other itemset of the input."""
    ordered = sorted(frequents, key=lambda s: (-len(s.items), s.items))
    maximal: list[ItemSet] = []
    kept: list[frozenset] = []
    for s in ordered:
        fs = frozenset(s.items)
        if any(fs < k for k in kept) or fs in kept:
            continue
        maximal.append(s)
        kept.append(fs)
    return sorted(maximal, key=lambda s: (len(s.items), s.items))


def variable_sets(maximals: Sequence[ItemSet]) -> list[VariableSet]:
    """Distinct feature sets (size >= 2) touched by the given itemsets, sorted."""
    out = {variable_set(item.feature for item in s.items) for s in maximals}
    return sorted(v for v in out if len(v) >= 2)


def dump_itemsets(db: TransactionDb, itemsets: Sequence[ItemSet]) -> str:
    lines = [
        f"{s.support:.6g}\t" + ",".join(db.render_item(i) for i in s.items) for s in itemsets
    ]
    return "\n".join(lines) + ("\n" if lines else "")
