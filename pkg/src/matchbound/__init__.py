"""Tight upper bound for fractional online bipartite matching with two-sided arrivals.

Computes the optimal ratio and the water-filling threshold that attains it,
tabulates the adversary's value functions, and plays the adversarial
construction against pluggable online algorithms.
"""

__version__ = "0.1.0"

from .adversary import AdversaryParams, Transcript, check_structure, run_construction
from .algorithms import FLEET, ThresholdFunction, make_algorithm, water_fill
from .cohort import run_cohort_construction
from .frecursion import FParams, certify_claims, f_grid, f_sequence, find_negative_n
from .frontier import (build_frontier, compute_gamma_star, optimal_frontier,
                       verify_fact_tz)
from .model import AlgorithmDecision, ArrivalEvent, MatchState, apply_decision
from .oracle import OfflineGraph, max_matching, minimax_value

__all__ = [
    "AdversaryParams", "AlgorithmDecision", "ArrivalEvent", "FLEET", "FParams", "MatchState",
    "OfflineGraph", "ThresholdFunction", "Transcript", "apply_decision", "build_frontier",
    "certify_claims", "check_structure", "compute_gamma_star", "f_grid", "f_sequence",
    "find_negative_n", "make_algorithm", "max_matching", "minimax_value", "optimal_frontier",
    "run_cohort_construction", "run_construction", "verify_fact_tz", "water_fill",
]
