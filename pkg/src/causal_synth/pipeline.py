"""End-to-end runs: discovery, generation and scoring over a ground-truth benchmark."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .core import Dag, Dataset
from .discovery import DEFAULT_ALPHA, DEFAULT_MAX_LEN, DEFAULT_MIN_SUP, DEFAULT_N_BINS, discover
from .evaluation import correlation_baseline, distribution_error, edge_metrics, kde_fit, lof_report, random_baseline
from .generation import GenerationConfig, gencda
from .groundtruth import Benchmark
from .rng import stream

ALPHAS = (0.001, 0.01, 0.02, 0.05, 0.1)
BASELINES = ("pearson", "spearman", "hoeffding")


@dataclass(frozen=True)
class RunConfig:
    n_bins: int = DEFAULT_N_BINS
    min_sup: float = DEFAULT_MIN_SUP
    max_len: int = DEFAULT_MAX_LEN
    alpha: float = DEFAULT_ALPHA
    rows: int = 1000
    seed: int = 0
    prune: bool = False

    def __post_init__(self):
        if not 3 <= self.n_bins <= 10:
            raise ValueError(f"n_bins must be in [3, 10], got {self.n_bins}")
        if not 0 < self.min_sup <= 0.4:
            raise ValueError(f"min_sup must be in (0, 0.4], got {self.min_sup}")
        if self.max_len not in (3, 4, 5):
            raise ValueError(f"max_len must be 3, 4 or 5, got {self.max_len}")
        if self.alpha not in ALPHAS:
            raise ValueError(f"alpha must be one of {ALPHAS}, got {self.alpha}")
        if self.rows < 1:
            raise ValueError("rows must be >= 1")

    def with_updates(self, **kw) -> RunConfig:
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def derived_seed(seed: int, *names) -> int:
    """A plain integer seed for a named sub-stream, for APIs that take an int."""
    return int(stream(seed, *names).integers(2**31 - 1))


def generation_scores(real: Dataset, synth: Dataset, rng: np.random.Generator, real_kdes=None) -> dict:
    sse, rmse = distribution_error(real, synth, rng, real_kdes)
    lof = lof_report(real, synth)
    return {"sse": sse, "rmse": rmse, "lof_median": lof.median, "n_outliers": lof.n_outliers}


SUMMARY_COLUMNS = (
    "dag", "dataset", "n_nodes", "n_edges", "n_predicted",
    "accuracy", "precision", "recall", "f1",
    "pearson_precision", "spearman_precision", "hoeffding_precision",
    "pearson_recall", "spearman_recall", "hoeffding_recall",
    "gencda_sse", "gencda_rmse", "gencda_lof_median", "gencda_outliers",
    "rnd_sse", "rnd_rmse", "rnd_lof_median", "rnd_outliers",
)


def evaluate_entry(data: Dataset, truth: Dag, config: RunConfig, *names) -> tuple[dict, dict]:
    """Score one dataset; returns (summary row, timings). ``names`` key the random sub-streams."""
    seed = config.seed
    t0 = time.perf_counter()
    report = discover(data, config.n_bins, config.min_sup, config.max_len, config.alpha, prune=config.prune)
    t1 = time.perf_counter()
    m = edge_metrics(truth, report.dag)
    row = {
        "n_nodes": truth.n_nodes, "n_edges": len(truth.edges), "n_predicted": len(report.dag.edges),
        "accuracy": m.accuracy, "precision": m.precision, "recall": m.recall, "f1": m.f1,
    }
    for method in BASELINES:
        bm = edge_metrics(truth, correlation_baseline(data, method))
        row[f"{method}_precision"] = bm.precision
        row[f"{method}_recall"] = bm.recall
    t2 = time.perf_counter()

    synth = gencda(data, report.dag, GenerationConfig(config.rows, derived_seed(seed, "generate", *names)))
    rnd = random_baseline(data, config.rows, stream(seed, "rnd", *names))
    t3 = time.perf_counter()
    real_kdes = [kde_fit(data.values[:, j]) for j in range(data.n_features)]
    for label, table in (("gencda", synth), ("rnd", rnd)):
        scores = generation_scores(data, table, stream(seed, "score", label, *names), real_kdes)
        row[f"{label}_sse"] = scores["sse"]
        row[f"{label}_rmse"] = scores["rmse"]
        row[f"{label}_lof_median"] = scores["lof_median"]
        row[f"{label}_outliers"] = scores["n_outliers"]
    t4 = time.perf_counter()
    timings = {
        "apriori": report.apriori_seconds, "ncd": report.ncd_seconds, "discover": t1 - t0,
        "baselines": t2 - t1, "generate": t3 - t2, "score": t4 - t3,
    }
    return row, timings


def run_benchmark(bench: Benchmark, config: RunConfig, progress=None) -> list[dict]:
    """Discovery, baselines, generation and scoring for every dataset of a benchmark."""
    rows = []
    for e in bench.entries:
        row, timings = evaluate_entry(e.data.dataset, e.dag, config, "benchmark", e.dag_index, e.dataset_index)
        rows.append({"dag": e.dag_index, "dataset": e.dataset_index, **row})
        if progress is not None:
            progress(e, row, timings)
    return rows


def format_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".10g")


def rows_to_csv(rows: list[dict], columns) -> str:
    lines = [",".join(columns)]
    lines += [",".join(format_value(r[c]) for c in columns) for r in rows]
    return "\n".join(lines) + "\n"
