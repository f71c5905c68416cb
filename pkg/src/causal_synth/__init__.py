"""Apriori-filtered additive-noise causal discovery and causality-respecting synthetic data."""

from .core import Dag, Dataset, VariableSet, read_dag, write_dag
from .discovery import CandidateModel, Outcome, discover, ncd, ncda, test_partition, update_graph
from .errors import CausalSynthError, CycleError
from .evaluation import edge_metrics, distribution_error, kde_fit, lof_report, random_baseline
from .generation import GenerationConfig, fit_distribution, gencda, predict_ensemble, train_ensemble
from .groundtruth import make_benchmark, random_dag, synthesize_dataset
from .hsic import hsic_test
from .mining import apriori, discretize, maximal_itemsets, variable_sets
from .regression import nonlinear_regress

__all__ = [
    "Dag", "Dataset", "VariableSet", "read_dag", "write_dag",
    "CandidateModel", "Outcome", "discover", "ncd", "ncda", "test_partition", "update_graph",
    "CausalSynthError", "CycleError",
    "edge_metrics", "distribution_error", "kde_fit", "lof_report", "random_baseline",
    "GenerationConfig", "fit_distribution", "gencda", "predict_ensemble", "train_ensemble",
    "make_benchmark", "random_dag", "synthesize_dataset",
    "hsic_test",
    "apriori", "discretize", "maximal_itemsets", "variable_sets",
    "nonlinear_regress",
]
