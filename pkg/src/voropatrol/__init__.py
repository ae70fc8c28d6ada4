"""Voronoi-allocation multi-agent patrolling with attrition-aware reallocation."""
from ._accel import USING_NUMBA
from .allocation import (Agent, Assignment, Fleet, changed_agents, mw_voronoi_line, neighbors,
                         optimal_agent, reallocate_after_attrition, voronoi_partition)
from .errors import CapExceededError, GraphFormatError, PatrolError, ValidationError
from .graph import PatrolGraph, ShortestPaths, all_pairs_shortest_paths, parse_graph, travel_costs
from .oracle import (Solution, approximation_ratio, evaluate_objective, heuristic_solution,
                     solve_centralized, solve_with_attrition)
from .routing import Route, cycle_time, exact_tour, nn_tour
from .sim import MetricsLog, Scenario, inject_attrition, run

__all__ = [
    "USING_NUMBA", "Agent", "Assignment", "Fleet", "changed_agents", "mw_voronoi_line",
    "neighbors", "optimal_agent", "reallocate_after_attrition", "voronoi_partition",
    "CapExceededError", "GraphFormatError", "PatrolError", "ValidationError", "PatrolGraph",
    "ShortestPaths", "all_pairs_shortest_paths", "parse_graph", "travel_costs", "Solution",
    "approximation_ratio", "evaluate_objective", "heuristic_solution", "solve_centralized",
    "solve_with_attrition", "Route", "cycle_time", "exact_tour", "nn_tour", "MetricsLog",
    "Scenario", "inject_attrition", "run",
]
