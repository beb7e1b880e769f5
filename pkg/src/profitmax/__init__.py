"""Profit-driven seed selection for viral marketing on directed graphs.

The pipeline: load a weighted graph, prune the seed search space to a
lattice, select seeds inside it (greedy or modular-modular), and certify the
selection with an a-posteriori approximation guarantee.  Estimates run on
reverse-reachable sample collections; an exact brute-force oracle covers
small graphs and all testing.
"""

from .certify import ProfitCertificate, certify, epsilon_mu, mu_bound
from .errors import (CapacityError, ConfigError, DomainError, InternalError,
                     ParseError, ProfitMaxError)
from .evaluation import MarginalEvaluator
from .graph import (WeightedGraph, WeightTotals, assign_weights, load_edge_list,
                    load_graph_json, load_weights, normalize_weights,
                    save_edge_list, save_graph_json, save_weights)
from .optimize import (ModularFunction, SelectionResult, baseline, greedy,
                       k_sweep, make_permutation, maximize_modular_difference,
                       modmod, modular_lower, modular_upper, sweep_sizes)
from .oracle import (ExactEvaluation, ExactEvaluator, LiveEdgeWorld,
                     enumerate_worlds, exact_evaluate, exact_marginal,
                     exhaustive_optimum, reachable_in_world, simulate_spread)
from .prune import Lattice, PruneStep, iterative_prune, project, trivial_lattice
from .rrsets import (AliasTable, ProfitEstimator, RRCollection, chernoff_a,
                     confidence_bounds, coverage, estimate, generate,
                     load_collection, marginal_coverage, sampling_error_limit,
                     save_collection, theta_for_relative_error)

__version__ = "0.1.0"

__all__ = [
    "AliasTable", "CapacityError", "ConfigError", "DomainError",
    "ExactEvaluation", "ExactEvaluator", "InternalError", "Lattice",
    "LiveEdgeWorld", "MarginalEvaluator", "ModularFunction", "ParseError",
    "ProfitCertificate", "ProfitEstimator", "ProfitMaxError", "PruneStep",
    "RRCollection", "SelectionResult", "WeightTotals", "WeightedGraph",
    "assign_weights", "baseline", "certify", "chernoff_a", "confidence_bounds",
    "coverage", "enumerate_worlds", "epsilon_mu", "estimate", "exact_evaluate",
    "exact_marginal", "exhaustive_optimum", "generate", "greedy",
    "iterative_prune", "k_sweep", "load_collection", "load_edge_list",
    "load_graph_json", "load_weights", "make_permutation",
    "marginal_coverage", "maximize_modular_difference", "modmod",
    "modular_lower", "modular_upper", "mu_bound", "normalize_weights",
    "project", "reachable_in_world", "sampling_error_limit", "save_collection",
    "save_edge_list", "save_graph_json", "save_weights", "simulate_spread",
    "sweep_sizes", "theta_for_relative_error", "trivial_lattice",
]
