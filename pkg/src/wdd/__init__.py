"""Weight-aware delta debugging: ddmin, W_ddmin, ProbDD and W_ProbDD over
weighted lists and syntax trees."""

from .algorithms import ALGORITHM_NAMES, minimize
from .core import CachedOracle, Element, OracleCache, WeightedList, tokenize
from .ddmin import check_one_minimal, ddmin, split_evenly, wddmin, weight_partition
from .metrics import ReductionReport, deletion_probability_by_weight, spearman_rho
from .probdd import get_nodes_to_remove, probdd, update_probabilities, wprobdd
from .tree import build_tree, fixpoint_reduce, hdd_reduce, render

__all__ = [
    "ALGORITHM_NAMES",
    "CachedOracle",
    "Element",
    "OracleCache",
    "ReductionReport",
    "WeightedList",
    "build_tree",
    "check_one_minimal",
    "ddmin",
    "deletion_probability_by_weight",
    "fixpoint_reduce",
    "get_nodes_to_remove",
    "hdd_reduce",
    "minimize",
    "probdd",
    "render",
    "spearman_rho",
    "split_evenly",
    "tokenize",
    "update_probabilities",
    "wddmin",
    "weight_partition",
    "wprobdd",
]

__version__ = "0.1.0"
