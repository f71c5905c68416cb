"""Command-line entry point: discover, generate, benchmark, evaluate, ground-truth."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from threadpoolctl import threadpool_limits

from .core import Dag, Dataset, read_dag, write_dag
from .discovery import candidates_csv, discover
from .errors import CausalSynthError, DatasetError, DegenerateColumnError, NodeCountMismatch
from .evaluation import edge_metrics
from .generation import GenerationConfig, gencda
from .groundtruth import INDEPENDENT_MODES, MIXED_FAMILIES, make_benchmark
from .pipeline import SUMMARY_COLUMNS, RunConfig, derived_seed, generation_scores, rows_to_csv, run_benchmark
from .rng import stream

EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_DAG_MISMATCH = 4
EXIT_SHAPE = 5

SEED_ENV = "CAUSAL_SYNTH_SEED"
CONFIG_KEYS = {"n_bins": int, "min_sup": float, "max_len": int, "alpha": float, "rows": int, "seed": int}
METRIC_COLUMNS = ("dataset", "method", "accuracy", "precision", "recall", "f1", "sse", "rmse", "lof_median", "n_outliers")

log = logging.getLogger("causal_synth")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def read_config_file(path: str) -> dict:
    """``key=value`` lines; blank lines and ``#`` comments are ignored."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read config file {path}: {exc.strerror}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in CONFIG_KEYS:
            raise CliError(EXIT_INPUT, f"{path}:{lineno}: expected one of {sorted(CONFIG_KEYS)} as key=value")
        try:
            out[key] = CONFIG_KEYS[key](value.strip())
        except ValueError as exc:
            raise CliError(EXIT_INPUT, f"{path}:{lineno}: bad value for {key}: {value.strip()!r}") from exc
    return out


def resolve_config(args) -> RunConfig:
    """Flags beat the config file, which beats the environment seed, which beats the defaults."""
    values = read_config_file(args.config) if args.config else {}
    if "seed" not in values and os.environ.get(SEED_ENV):
        try:
            values["seed"] = int(os.environ[SEED_ENV])
        except ValueError as exc:
            raise CliError(EXIT_INPUT, f"{SEED_ENV} must be an integer") from exc
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    try:
        return RunConfig(**values, prune=bool(getattr(args, "prune", False)))
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from exc


def load_dataset(path: str) -> Dataset:
    try:
        return Dataset.read_csv(path)
    except FileNotFoundError as exc:
        raise CliError(EXIT_INPUT, f"no such file: {path}") from exc
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {exc.strerror}") from exc
    except DatasetError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from exc


def load_dag(path: str) -> tuple[Dag, list[str]]:
    try:
        return read_dag(path)
    except FileNotFoundError as exc:
        raise CliError(EXIT_INPUT, f"no such file: {path}") from exc
    except (OSError, ValueError, KeyError, TypeError, CausalSynthError) as exc:
        raise CliError(EXIT_INPUT, f"{path}: not a valid DAG file ({exc})") from exc


def timing(label: str, seconds: float) -> None:
    print(f"{label}_seconds={seconds:.3f}", file=sys.stderr)


def run_discovery(data: Dataset, config: RunConfig):
    try:
        return discover(data, config.n_bins, config.min_sup, config.max_len, config.alpha, prune=config.prune)
    except DegenerateColumnError as exc:
        raise CliError(EXIT_DEGENERATE, f"constant columns cannot be discretized: {', '.join(exc.columns)}") from exc


# -- subcommands -------------------------------------------------------------


def cmd_discover(args) -> int:
    config = resolve_config(args)
    data = load_dataset(args.input)
    report = run_discovery(data, config)
    timing("apriori", report.apriori_seconds)
    timing("ncd", report.ncd_seconds)
    dag_json = report.dag.to_json(data.names)
    if args.out:
        Path(args.out).write_text(dag_json)
    else:
        sys.stdout.write(dag_json)
    if args.dot:
        Path(args.dot).write_text(report.dag.to_dot(data.names))
    if args.candidates:
        Path(args.candidates).write_text(candidates_csv(report.candidates, data.names))
    if args.truth:
        truth, names = load_dag(args.truth)
        if truth.n_nodes != data.n_features:
            raise CliError(EXIT_DAG_MISMATCH, f"truth DAG has {truth.n_nodes} nodes, data has {data.n_features} columns")
        m = edge_metrics(truth, report.dag)
        print(f"accuracy={m.accuracy:.6g} precision={m.precision:.6g} recall={m.recall:.6g} f1={m.f1:.6g}")
    return 0


def cmd_generate(args) -> int:
    config = resolve_config(args)
    data = load_dataset(args.input)
    t0 = time.perf_counter()
    if args.discover:
        dag = run_discovery(data, config).dag
    else:
        dag, names = load_dag(args.dag)
        if dag.n_nodes != data.n_features:
            raise CliError(EXIT_DAG_MISMATCH, f"DAG has {dag.n_nodes} nodes but {args.input} has {data.n_features} columns")
        if list(names) != list(data.names) and not all(n.isdigit() for n in names):
            raise CliError(EXIT_DAG_MISMATCH, f"DAG node names {names} do not match CSV header {list(data.names)}")
    gen = GenerationConfig(config.rows, derived_seed(config.seed, "generate"), residual_noise=args.residual_noise)
    synth = gencda(data, dag, gen)
    timing("generate", time.perf_counter() - t0)
    if args.out:
        synth.write_csv(args.out)
    else:
        sys.stdout.write(synth.to_csv())
    return 0


def _bundle_args(args, config):
    return dict(n_dags=args.dags, datasets_per_dag=args.per_dag, n_rows=config.rows, seed=config.seed,
                independent_mode=args.mode)


def cmd_ground_truth(args) -> int:
    config = resolve_config(args)
    t0 = time.perf_counter()
    make_benchmark(**_bundle_args(args, config), out_dir=args.out)
    timing("ground_truth", time.perf_counter() - t0)
    return 0


def cmd_benchmark(args) -> int:
    config = resolve_config(args)
    t0 = time.perf_counter()
    bench = make_benchmark(**_bundle_args(args, config), out_dir=args.out)

    def progress(entry, row, timings):
        log.info("dag %d dataset %d: precision=%.3f %s", entry.dag_index, entry.dataset_index, row["precision"],
                 " ".join(f"{k}={v:.2f}s" for k, v in timings.items()))

    rows = run_benchmark(bench, config, progress)
    summary = Path(args.summary) if args.summary else Path(args.out) / "summary.csv"
    summary.write_text(rows_to_csv(rows, SUMMARY_COLUMNS))
    n = len(rows)
    print(f"datasets={n} mean_precision={sum(r['precision'] for r in rows) / n:.4f} "
          f"mean_recall={sum(r['recall'] for r in rows) / n:.4f}")
    timing("benchmark", time.perf_counter() - t0)
    return 0


def cmd_evaluate(args) -> int:
    config = resolve_config(args)
    truth, _ = load_dag(args.truth)
    predicted, _ = load_dag(args.predicted)
    try:
        m = edge_metrics(truth, predicted)
    except NodeCountMismatch as exc:
        raise CliError(EXIT_SHAPE, str(exc)) from exc
    row = {"dataset": Path(args.real).stem, "method": args.method,
           "accuracy": m.accuracy, "precision": m.precision, "recall": m.recall, "f1": m.f1}
    real = load_dataset(args.real)
    synth = load_dataset(args.synth)
    if real.names != synth.names:
        raise CliError(EXIT_SHAPE, f"column mismatch: {list(real.names)} vs {list(synth.names)}")
    if truth.n_nodes != real.n_features:
        raise CliError(EXIT_SHAPE, f"DAG has {truth.n_nodes} nodes, data has {real.n_features} columns")
    try:
        row.update(generation_scores(real, synth, stream(config.seed, "evaluate")))
    except DegenerateColumnError as exc:
        raise CliError(EXIT_DEGENERATE, str(exc)) from exc
    except ValueError as exc:
        raise CliError(EXIT_SHAPE, str(exc)) from exc
    csv = rows_to_csv([row], METRIC_COLUMNS)
    if args.out:
        Path(args.out).write_text(csv)
    else:
        sys.stdout.write(csv)
    return 0


# -- parser ------------------------------------------------------------------


def _add_config_flags(p: argparse.ArgumentParser, rows_help: str = "rows to generate") -> None:
    g = p.add_argument_group("run configuration (flags > --config file > defaults)")
    g.add_argument("--config", metavar="FILE", help="key=value file with any of: " + ", ".join(CONFIG_KEYS))
    g.add_argument("--n-bins", dest="n_bins", type=int, help="equal-width bins per column, 3..10 (default 10)")
    g.add_argument("--min-sup", dest="min_sup", type=float, help="Apriori minimum support, (0, 0.4] (default 0.05)")
    g.add_argument("--max-len", dest="max_len", type=int, help="largest itemset / variable set, 3..5 (default 3)")
    g.add_argument("--alpha", type=float, help="HSIC significance level, one of 0.001 0.01 0.02 0.05 0.1 (default 0.001)")
    g.add_argument("--rows", type=int, help=f"{rows_help} (default 1000)")
    g.add_argument("--seed", type=int, help=f"random seed (default ${SEED_ENV}, else 0)")
    g.add_argument("--prune", action="store_true",
                   help="drop discovered edges that a third column screens off (extension, default off)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causal-synth",
        description="Apriori-filtered nonlinear causal discovery and causality-respecting synthetic data.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--threads", type=int, default=None, help="cap on BLAS/OpenMP threads (default: library choice)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="discover a causal DAG from a CSV")
    p.add_argument("input", help="CSV with a header row of attribute names")
    p.add_argument("--out", help="write the DAG JSON here (default stdout)")
    p.add_argument("--dot", help="also write a DOT rendering")
    p.add_argument("--candidates", help="write every tested variable set as CSV")
    p.add_argument("--truth", help="ground-truth DAG JSON; prints edge metrics to stdout")
    _add_config_flags(p)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("generate", help="generate synthetic rows that follow a DAG")
    p.add_argument("input", help="real CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dag", help="DAG JSON over the CSV columns")
    src.add_argument("--discover", action="store_true", help="discover the DAG from the input first")
    p.add_argument("--out", help="synthetic CSV path (default stdout)")
    p.add_argument("--residual-noise", action="store_true",
                   help="add resampled training residuals to dependent columns (default off)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_generate)

    for name, func, helptext in (
        ("benchmark", cmd_benchmark, "build a ground-truth bundle, run discovery + generation, write summary.csv"),
        ("ground-truth", cmd_ground_truth, "build a ground-truth bundle only"),
    ):
        p = sub.add_parser(name, help=helptext, formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.add_argument("--out", required=True, help="bundle directory")
        p.add_argument("--dags", type=int, default=10, help="number of random DAGs")
        p.add_argument("--per-dag", dest="per_dag", type=int, default=10, help="datasets per DAG")
        p.add_argument("--mode", choices=INDEPENDENT_MODES, default=MIXED_FAMILIES,
                       help="how source columns are drawn")
        if name == "benchmark":
            p.add_argument("--summary", help="summary CSV path (default OUT/summary.csv)")
        _add_config_flags(p, "rows per dataset")
        p.set_defaults(func=func)

    p = sub.add_parser("evaluate", help="score a predicted DAG and a synthetic CSV")
    p.add_argument("--truth", required=True, help="ground-truth DAG JSON")
    p.add_argument("--predicted", required=True, help="predicted DAG JSON")
    p.add_argument("--real", required=True, help="real CSV")
    p.add_argument("--synth", required=True, help="synthetic CSV")
    p.add_argument("--method", default="gencda", help="label for the method column")
    p.add_argument("--out", help="metrics CSV path (default stdout)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.threads is not None:
            if args.threads < 1:
                raise CliError(EXIT_INPUT, "--threads must be >= 1")
            with threadpool_limits(limits=args.threads):
                return args.func(args)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
