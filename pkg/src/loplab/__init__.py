"""Weights and linear order preservation for ordinal incomplete pairwise comparison matrices."""

from .em import (CompletionResult, ConvergenceError, PerronResult, cr_index, em_complete, em_weights,
                 estimate_random_index, perron)
from .family import (FamilyParams, family_gap_closed_form, family_gap_via_reduced_system,
                     generate_family)
from .llsm import llsm_exact, llsm_exact_edges, llsm_float, llsm_objective
from .lop import LopReport, check_lop, compare_rankings, edge_violations, lop_gap, ranking
from .pcm import (DagPattern, GeneralPcm, LogWeights, NotConnected, OrdinalPcm, ParseError, Weights,
                  elementwise_power, is_weakly_connected, linear_order_permutation, parse_matrix,
                  parse_pattern, realize, render_dot, render_matrix, render_pattern)
from .search import SearchHit, SearchResult, SearchTask, canonical_id, replay, run_search

__version__ = "0.1.0"

__all__ = [
    "CompletionResult", "ConvergenceError", "PerronResult", "cr_index", "em_complete", "em_weights",
    "estimate_random_index", "perron", "FamilyParams", "family_gap_closed_form",
    "family_gap_via_reduced_system", "generate_family", "llsm_exact", "llsm_exact_edges", "llsm_float",
    "llsm_objective", "LopReport", "check_lop", "compare_rankings", "edge_violations", "lop_gap", "ranking",
    "DagPattern", "GeneralPcm", "LogWeights", "NotConnected", "OrdinalPcm", "ParseError", "Weights",
    "elementwise_power", "is_weakly_connected", "linear_order_permutation", "parse_matrix", "parse_pattern",
    "realize", "render_dot", "render_matrix", "render_pattern", "SearchHit", "SearchResult", "SearchTask",
    "canonical_id", "replay", "run_search",
]
