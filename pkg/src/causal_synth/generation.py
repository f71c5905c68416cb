"""Causality-respecting synthetic data: parametric sources plus an ensemble regressor per dependent column."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats
from sklearn.neighbors import KNeighborsRegressor
from sklearn.tree import DecisionTreeRegressor

from .core import Dag, Dataset
from .errors import FitFailureError, ShapeError
from .hsic import as_block
from .regression import KernelRidge, RandomFourierRidge, _Standardizer
from .rng import stream

log = logging.getLogger(__name__)

FAMILIES = ("uniform", "normal", "exponential", "lognormal", "gamma", "beta", "laplace", "chisquare", "powerlaw")
HIST_BINS = 50
MIN_FIT_ROWS = 30
MIN_TRAIN_ROWS = 30
# open support families get their lower bound this fraction of the range below the data
SUPPORT_MARGIN = 0.01


@dataclass(frozen=True)
class DistributionFit:
    family: str
    params: dict
    sse_score: float = 0.0
    ks_statistic: float = 0.0

    def frozen(self):
        """The fitted distribution as a frozen ``scipy.stats`` object."""
        p = self.params
        f = self.family
        if f == "uniform":
            return stats.uniform(loc=p["low"], scale=p["high"] - p["low"])
        if f == "normal":
            return stats.norm(loc=p["mean"], scale=p["std"])
        if f == "exponential":
            return stats.expon(loc=p["loc"], scale=p["scale"])
        if f == "lognormal":
            return stats.lognorm(p["sigma"], loc=p["loc"], scale=np.exp(p["mu"]))
        if f == "gamma":
            return stats.gamma(p["shape"], loc=p["loc"], scale=p["scale"])
        if f == "beta":
            return stats.beta(p["a"], p["b"], loc=p["loc"], scale=p["scale"])
        if f == "laplace":
            return stats.laplace(loc=p["loc"], scale=p["scale"])
        if f == "chisquare":
            return stats.chi2(p["df"], loc=p["loc"])
        if f == "powerlaw":
            return stats.powerlaw(p["a"], loc=p["loc"], scale=p["scale"])
        raise ValueError(f"unknown family {f!r}")


def _positive(x: np.ndarray, name: str) -> float:
    """Shift that puts every value strictly inside (0, inf); requires a spread-out column."""
    rng_ = np.ptp(x)
    if rng_ <= 0:
        raise FitFailureError(f"{name}: constant column")
    return float(x.min() - SUPPORT_MARGIN * rng_)


def _estimate(x: np.ndarray, family: str) -> dict:
    """Closed-form parameter estimates (MLE where it has one, method of moments otherwise)."""
    mean, std = float(x.mean()), float(x.std())
    if std <= 0:
        raise FitFailureError(f"{family}: constant column")
    if family == "uniform":
        return {"low": float(x.min()), "high": float(x.max())}
    if family == "normal":
        return {"mean": mean, "std": std}
    if family == "exponential":
        loc = float(x.min())
        return {"loc": loc, "scale": mean - loc}
    if family == "laplace":
        med = float(np.median(x))
        return {"loc": med, "scale": float(np.mean(np.abs(x - med)))}
    if family == "lognormal":
        loc = _positive(x, family)
        logs = np.log(x - loc)
        return {"loc": loc, "mu": float(logs.mean()), "sigma": float(logs.std())}
    if family == "gamma":
        loc = _positive(x, family)
        m = mean - loc
        return {"loc": loc, "shape": m * m / std**2, "scale": std**2 / m}
    if family == "chisquare":
        loc = _positive(x, family)
        return {"loc": loc, "df": mean - loc}
    if family in ("beta", "powerlaw"):
        margin = SUPPORT_MARGIN * float(np.ptp(x))
        loc, scale = float(x.min()) - margin, float(np.ptp(x)) + 2 * margin
        u = (x - loc) / scale
        if family == "powerlaw":
            return {"loc": loc, "scale": scale, "a": float(-len(u) / np.log(u).sum())}
        um, uv = float(u.mean()), float(u.var())
        common = um * (1 - um) / uv - 1
        if common <= 0:
            raise FitFailureError("beta: variance too large for moment matching")
        return {"loc": loc, "scale": scale, "a": um * common, "b": (1 - um) * common}
    raise FitFailureError(f"unknown family {family!r}")


def fit_distribution(column, families: Sequence[str] = FAMILIES) -> DistributionFit:
    """Fit every family and keep the one whose PDF is closest (SSE) to a 50-bin histogram."""
    x = np.asarray(column, dtype=float).ravel()
    if len(x) < MIN_FIT_ROWS:
        raise ValueError(f"need at least {MIN_FIT_ROWS} values, got {len(x)}")
    if not families:
        raise ValueError("no candidate families")
    density, edges = np.histogram(x, bins=HIST_BINS, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    best = None
    for family in families:
        try:
            candidate = DistributionFit(family, _estimate(x, family))
            with np.errstate(all="ignore"):
                pdf = candidate.frozen().pdf(centers)
            if not np.all(np.isfinite(pdf)):
                raise FitFailureError(f"{family}: non-finite density")
        except FitFailureError as exc:
            log.debug("skipping family: %s", exc)
            continue
        sse = float(np.sum((pdf - density) ** 2))
        if best is None or sse < best[0]:
            best = (sse, candidate)
    if best is None:
        raise FitFailureError(f"no family could be fitted out of {list(families)}")
    sse, fit = best
    ks = float(stats.kstest(x, fit.frozen().cdf).statistic)
    return DistributionFit(fit.family, fit.params, sse, ks)


def sample_distribution(fit: DistributionFit, n: int, rng: np.random.Generator) -> np.ndarray:
    if n == 0:
        return np.empty(0)
    return np.asarray(fit.frozen().rvs(size=n, random_state=rng), dtype=float).reshape(n)


class _Scaled:
    """Wraps a regressor so it sees standardized inputs."""

    def __init__(self, model):
        self.model = model

    def fit(self, x, y):
        y = np.asarray(y, dtype=float).ravel()
        # tree and kNN averages drift by an ulp on a constant target
        self._constant = y[0] if np.all(y == y[0]) else None
        self._scale = _Standardizer(x)
        self.model.fit(self._scale(x), y)
        return self

    def predict(self, x):
        if self._constant is not None:
            return np.full(len(x), self._constant)
        return self.model.predict(self._scale(x))


def default_members() -> list:
    return [
        KernelRidge(),
        RandomFourierRidge(),
        _Scaled(KNeighborsRegressor(n_neighbors=5)),
        _Scaled(DecisionTreeRegressor(max_depth=8, min_samples_leaf=5, random_state=0)),
    ]


@dataclass
class RegressorEnsemble:
    members: list
    n_inputs: int


def train_ensemble(parents_data, target, members: Sequence | None = None) -> RegressorEnsemble:
    x = as_block(parents_data)
    y = np.asarray(target, dtype=float).ravel()
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"{x.shape[0]} parent rows for {y.shape[0]} targets")
    if x.shape[0] < MIN_TRAIN_ROWS:
        raise ValueError(f"need at least {MIN_TRAIN_ROWS} rows to train, got {x.shape[0]}")
    if x.shape[1] < 1:
        raise ValueError("need at least one parent column")
    members = default_members() if members is None else list(members)
    if len(members) != 4:
        raise ValueError("the ensemble has exactly four members")
    for m in members:
        m.fit(x, y)
    return RegressorEnsemble(members, x.shape[1])


def predict_ensemble(ensemble: RegressorEnsemble, parents_data) -> np.ndarray:
    x = as_block(parents_data)
    if x.shape[1] != ensemble.n_inputs:
        raise ShapeError(f"ensemble trained on {ensemble.n_inputs} columns, got {x.shape[1]}")
    # predict each distinct row once: BLAS blocking can otherwise split equal rows by an ulp
    rows, inverse = np.unique(x, axis=0, return_inverse=True)
    p0, p1, p2, p3 = (np.asarray(m.predict(rows), dtype=float).ravel() for m in ensemble.members)
    # pairwise sum keeps four identical predictions exact
    return (((p0 + p1) + (p2 + p3)) / 4.0)[inverse.ravel()]


@dataclass(frozen=True)
class GenerationConfig:
    n_rows: int = 1000
    rng_seed: int = 0
    families: tuple[str, ...] = FAMILIES
    residual_noise: bool = False

    def __post_init__(self):
        if self.n_rows < 1:
            raise ValueError("n_rows must be >= 1")


@dataclass
class GenerationResult:
    dataset: Dataset
    order: list[int]
    fits: dict[int, DistributionFit] = field(default_factory=dict)


def generate(
    data: Dataset,
    dag: Dag,
    config: GenerationConfig = GenerationConfig(),
    member_factory: Callable[[], Sequence] | None = None,
    on_generate: Callable[[int, frozenset], None] | None = None,
) -> GenerationResult:
    """Generate ``config.n_rows`` synthetic rows that follow ``dag``.

    Columns are produced in topological order. Parentless columns are sampled
    from their best-fitting parametric family; every other column is the
    ensemble prediction from its (already synthetic) parents, trained on the
    real parent/child columns. ``on_generate(j, done)`` sees the set of columns
    finished before ``j``.
    """
    if dag.n_nodes != data.n_features:
        raise ValueError(f"DAG has {dag.n_nodes} nodes but the data has {data.n_features} columns")
    n = config.n_rows
    real = data.values
    out = np.zeros((n, data.n_features))
    order = dag.topological_sort()
    done: set[int] = set()
    fits = {}
    for j in order:
        if on_generate is not None:
            on_generate(j, frozenset(done))
        rng = stream(config.rng_seed, "generation", j)
        parents = list(dag.parents(j))
        if not parents:
            fits[j] = fit_distribution(real[:, j], config.families)
            out[:, j] = sample_distribution(fits[j], n, rng)
        else:
            members = member_factory() if member_factory is not None else None
            ens = train_ensemble(real[:, parents], real[:, j], members)
            out[:, j] = predict_ensemble(ens, out[:, parents])
            if config.residual_noise:
                resid = real[:, j] - predict_ensemble(ens, real[:, parents])
                out[:, j] += rng.choice(resid, size=n, replace=True)
        done.add(j)
    if not np.all(np.isfinite(out)):
        raise FitFailureError("generation produced non-finite values")
    return GenerationResult(Dataset(data.names, out), order, fits)


def gencda(data: Dataset, dag: Dag, config: GenerationConfig = GenerationConfig(), **kwargs) -> Dataset:
    return generate(data, dag, config, **kwargs).dataset
