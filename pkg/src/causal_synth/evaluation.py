"""Scoring: edge confusion metrics, correlation baselines, KDE distribution error, LOF outlier counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree
from scipy.special import logsumexp

from .core import Dag, Dataset
from .errors import DegenerateColumnError, NodeCountMismatch, TooFewReferenceRows

# -- discovery metrics -------------------------------------------------------


@dataclass(frozen=True)
class EdgeMetrics:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def accuracy(self) -> float:
        total = self.tp + self.tn + self.fp + self.fn
        return (self.tp + self.tn) / total if total else 0.0

    @property
    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


def as_adjacency(graph) -> np.ndarray:
    """Boolean adjacency matrix from a Dag or a square array (entry [i, j] means i -> j)."""
    if isinstance(graph, Dag):
        return graph.adjacency().astype(bool)
    a = np.asarray(graph).astype(bool)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {a.shape}")
    return a


def edge_metrics(truth, predicted) -> EdgeMetrics:
    """Confusion counts over ordered pairs i != j. Either argument may be a Dag or an adjacency matrix."""
    t, p = as_adjacency(truth), as_adjacency(predicted)
    if t.shape != p.shape:
        raise NodeCountMismatch(f"truth has {t.shape[0]} nodes, prediction has {p.shape[0]}")
    off = ~np.eye(t.shape[0], dtype=bool)
    t, p = t[off], p[off]
    return EdgeMetrics(int(np.sum(t & p)), int(np.sum(~t & ~p)), int(np.sum(~t & p)), int(np.sum(t & ~p)))


# -- correlation baselines ---------------------------------------------------

BASELINE_THRESHOLDS = {"pearson": 0.05, "spearman": 0.05, "hoeffding": 0.03}


def hoeffding_d(x, y) -> float:
    """Hoeffding's D scaled by 30, so it lies in [-0.5, 1] and is 1 for a strictly monotone pair.

    Ties in the bivariate rank count a half per shared coordinate and a quarter per shared point.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 5:
        raise ValueError("Hoeffding's D needs at least 5 points")
    r = stats.rankdata(x)
    s = stats.rankdata(y)
    xl = x[None, :] < x[:, None]
    xe = x[None, :] == x[:, None]
    yl = y[None, :] < y[:, None]
    ye = y[None, :] == y[:, None]
    q = 1.0 + (xl & yl).sum(1) + 0.25 * ((xe & ye).sum(1) - 1) + 0.5 * (xe & yl).sum(1) + 0.5 * (xl & ye).sum(1)
    d1 = np.sum((q - 1) * (q - 2))
    d2 = np.sum((r - 1) * (r - 2) * (s - 1) * (s - 2))
    d3 = np.sum((r - 2) * (s - 2) * (q - 1))
    return float(30.0 * ((n - 2) * (n - 3) * d1 + d2 - 2 * (n - 2) * d3) / (n * (n - 1) * (n - 2) * (n - 3) * (n - 4)))


def correlation_baseline(data: Dataset, method: str, threshold: float | None = None) -> np.ndarray:
    """Symmetric boolean adjacency flagging every related column pair.

    Pearson and Spearman flag a pair when the correlation p-value is below the
    threshold; Hoeffding flags it when the scaled D statistic exceeds it.
    """
    if method not in BASELINE_THRESHOLDS:
        raise ValueError(f"unknown baseline {method!r}; choose from {sorted(BASELINE_THRESHOLDS)}")
    threshold = BASELINE_THRESHOLDS[method] if threshold is None else threshold
    x = data.values
    m = x.shape[1]
    adj = np.zeros((m, m), dtype=bool)
    for i in range(m):
        for j in range(i + 1, m):
            if method == "pearson":
                flag = stats.pearsonr(x[:, i], x[:, j]).pvalue < threshold
            elif method == "spearman":
                flag = stats.spearmanr(x[:, i], x[:, j]).pvalue < threshold
            else:
                flag = hoeffding_d(x[:, i], x[:, j]) > threshold
            adj[i, j] = adj[j, i] = bool(flag)
    return adj


# -- kernel density ----------------------------------------------------------

KDE_BANDWIDTHS = np.logspace(-0.5, 1.5, 20)
KDE_FOLDS = 5
MIN_KDE_ROWS = 30
_LOG_SQRT_2PI = 0.5 * np.log(2 * np.pi)


def _kde_logpdf(points: np.ndarray, sample: np.ndarray, h: float) -> np.ndarray:
    d2 = (points[:, None] - sample[None, :]) ** 2
    return logsumexp(-d2 / (2 * h * h), axis=1) - np.log(len(sample)) - np.log(h) - _LOG_SQRT_2PI


@dataclass(frozen=True, eq=False)
class KdeModel:
    sample: np.ndarray
    bandwidth: float
    cv_scores: tuple[float, ...] = ()

    def pdf(self, points) -> np.ndarray:
        return np.exp(_kde_logpdf(np.asarray(points, dtype=float).ravel(), self.sample, self.bandwidth))

    def sample_points(self, n: int, rng: np.random.Generator) -> np.ndarray:
        centers = self.sample[rng.integers(0, len(self.sample), size=n)]
        return centers + rng.normal(0.0, self.bandwidth, size=n)


def kde_fit(column, bandwidths=KDE_BANDWIDTHS) -> KdeModel:
    """Gaussian KDE whose bandwidth maximizes 5-fold cross-validated log-likelihood."""
    x = np.asarray(column, dtype=float).ravel()
    if len(x) < MIN_KDE_ROWS:
        raise ValueError(f"KDE needs at least {MIN_KDE_ROWS} values, got {len(x)}")
    if np.ptp(x) == 0:
        raise DegenerateColumnError(["<column>"])
    parts = np.array_split(np.arange(len(x)), KDE_FOLDS)
    bandwidths = np.asarray(bandwidths, dtype=float)
    totals = np.zeros(len(bandwidths))
    for idx in parts:
        train = np.delete(x, idx)
        d2 = (x[idx][:, None] - train[None, :]) ** 2
        for b, h in enumerate(bandwidths):
            ll = logsumexp(-d2 / (2 * h * h), axis=1) - np.log(len(train)) - np.log(h) - _LOG_SQRT_2PI
            totals[b] += ll.sum()
    scores = totals / KDE_FOLDS
    # first maximum wins, so ties go to the narrower bandwidth
    best = int(np.argmax(scores))
    return KdeModel(x, float(bandwidths[best]), tuple(float(s) for s in scores))


N_EVAL_POINTS = 1000


def distribution_error(
    real: Dataset,
    synth: Dataset,
    rng: np.random.Generator,
    real_kdes: list[KdeModel] | None = None,
) -> tuple[float, float]:
    """Mean over features of the SSE and RMSE between the real and synthetic KDE densities.

    Both densities are compared on 1000 points drawn from the real-column KDE.
    """
    if tuple(real.names) != tuple(synth.names):
        raise ValueError("real and synthetic data must have the same columns in the same order")
    sses, rmses = [], []
    for j in range(real.n_features):
        kr = real_kdes[j] if real_kdes is not None else kde_fit(real.values[:, j])
        ks = kde_fit(synth.values[:, j])
        grid = kr.sample_points(N_EVAL_POINTS, rng)
        sse = float(np.sum((kr.pdf(grid) - ks.pdf(grid)) ** 2))
        sses.append(sse)
        rmses.append(np.sqrt(sse / N_EVAL_POINTS))
    return float(np.mean(sses)), float(np.mean(rmses))


# -- local outlier factor ----------------------------------------------------

LOF_NEIGHBORS = 30


@dataclass(frozen=True, eq=False)
class LofReport:
    scores: np.ndarray

    @property
    def n_outliers(self) -> int:
        return int(np.sum(self.scores > 1.0))

    @property
    def median(self) -> float:
        return float(np.median(self.scores))


def _standardize(real: np.ndarray, other: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = real.mean(axis=0)
    std = real.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return (real - mean) / std, (other - mean) / std


def lof_scores(reference: np.ndarray, queries: np.ndarray, k: int = LOF_NEIGHBORS) -> np.ndarray:
    """Local outlier factor of each query row against a fixed reference population.

    A query's neighbours are its k nearest reference rows; reference rows use
    their k nearest other reference rows.
    """
    reference = np.asarray(reference, dtype=float)
    queries = np.asarray(queries, dtype=float)
    if reference.shape[0] <= k:
        raise TooFewReferenceRows(f"need more than {k} reference rows, got {reference.shape[0]}")
    tree = cKDTree(reference)
    ref_dist, ref_idx = tree.query(reference, k=k + 1)
    # drop each point itself; with duplicates the self match may not come first
    own = ref_idx == np.arange(len(reference))[:, None]
    has_own = own.any(axis=1)
    keep = ~own
    keep[~has_own, -1] = False
    ref_dist = ref_dist[keep].reshape(len(reference), k)
    ref_idx = ref_idx[keep].reshape(len(reference), k)
    k_distance = ref_dist[:, -1]
    ref_reach = np.maximum(ref_dist, k_distance[ref_idx]).mean(axis=1)

    q_dist, q_idx = tree.query(queries, k=k)
    q_dist = q_dist.reshape(len(queries), k)
    q_idx = q_idx.reshape(len(queries), k)
    q_reach = np.maximum(q_dist, k_distance[q_idx]).mean(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ref_lrd = 1.0 / ref_reach
        q_lrd = 1.0 / q_reach
        neighbour_lrd = ref_lrd[q_idx].mean(axis=1)
        lof = neighbour_lrd / q_lrd
    # a query stacked on duplicated reference rows: infinite density on both sides
    return np.where(np.isinf(neighbour_lrd) & np.isinf(q_lrd), 1.0, lof)


def lof_report(real: Dataset, synth: Dataset, k: int = LOF_NEIGHBORS) -> LofReport:
    """LOF of every synthetic row with the standardized real rows as the only reference population."""
    if real.n_features != synth.n_features:
        raise ValueError("real and synthetic data must have the same feature space")
    ref, q = _standardize(real.values, synth.values)
    return LofReport(lof_scores(ref, q, k))


def random_baseline(real: Dataset, n_rows: int, rng: np.random.Generator) -> Dataset:
    """Each column drawn independently and uniformly over the real column's [min, max]."""
    lo = real.values.min(axis=0)
    hi = real.values.max(axis=0)
    return Dataset(real.names, rng.uniform(lo, hi, size=(n_rows, real.n_features)))
