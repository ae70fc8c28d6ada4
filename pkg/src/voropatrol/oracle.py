"""Exact centralized optimum at desk scale, and heuristic-vs-optimal ratios.

The optimum is found by enumerating every exactly-one assignment of the
non-origin nodes to alive agents (each alive agent always keeps its own
origin) and pricing each agent's share with an exact tour.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .allocation import Assignment, Fleet, assignment_to_csv, voronoi_partition
from .errors import CapExceededError, ValidationError
from .graph import TOL
from .routing import Route, exact_tour, nn_tour, routes_to_csv

MAX_NODES = 8
MAX_AGENTS = 6


@dataclass(frozen=True)
class Solution:
    assignment: Assignment
    routes: tuple[Route, ...]
    objective: float

    def route_of(self, agent: int) -> Route | None:
        for r in self.routes:
            if r.agent == agent:
                return r
        return None


def evaluate_objective(assignment: Assignment, routes, n: int | None = None) -> float:
    """Average node idleness ``(1/n) * sum_a cycle_time(a) * |nodes(a)|``."""
    n = assignment.n if n is None else n
    if n != assignment.n:
        raise ValidationError("n does not match the assignment")
    covered = np.zeros(n, dtype=np.int64)
    terms = []
    for r in routes:
        mine = assignment.nodes_of(r.agent)
        if sorted(r.order) != mine:
            raise ValidationError(f"route of agent {r.agent} does not match its assigned nodes")
        covered[list(r.order)] += 1
        terms.append(r.cycle_time * len(mine))
    if np.any(covered != 1):
        raise ValidationError("coverage violation: every node needs exactly one route")
    return math.fsum(terms) / n


def _check_caps(n: int, fleet: Fleet) -> None:
    if n > MAX_NODES:
        raise CapExceededError(f"oracle limited to n <= {MAX_NODES}, got {n}")
    if fleet.m > MAX_AGENTS:
        raise CapExceededError(f"oracle limited to m <= {MAX_AGENTS}, got {fleet.m}")


def solve_centralized(fleet: Fleet, costs) -> Solution:
    """Globally optimal assignment and tours.

    Among equal optima the lexicographically smallest owner vector wins.
    """
    costs = np.asarray(costs)
    n = costs.shape[1]
    _check_caps(n, fleet)
    fleet.check_nodes(n)
    alive = fleet.alive_ids
    if not alive:
        raise ValidationError("no alive agents")
    origins = {fleet.agents[a].origin: a for a in alive}
    free = [i for i in range(n) if i not in origins]

    tours: dict[tuple[int, int], Route] = {}

    def tour(agent, mask):
        key = (agent, mask)
        if key not in tours:
            nodes = [free[k] for k in range(len(free)) if mask >> k & 1]
            tours[key] = exact_tour(nodes, fleet.agents[agent].origin, costs[agent], agent)
        return tours[key]

    best = None
    for choice in itertools.product(alive, repeat=len(free)):
        masks = dict.fromkeys(alive, 0)
        for k, a in enumerate(choice):
            masks[a] |= 1 << k
        terms = []
        for a in alive:
            r = tour(a, masks[a])
            terms.append(r.cycle_time * len(r.order))
        z = math.fsum(terms) / n
        if best is None or z < best[0]:
            best = (z, choice, masks)

    z, choice, masks = best
    owner = np.empty(n, dtype=np.int64)
    for node, a in origins.items():
        owner[node] = a
    for k, a in enumerate(choice):
        owner[free[k]] = a
    routes = tuple(tour(a, masks[a]) for a in alive)
    assignment = Assignment(owner, fleet.m)
    return Solution(assignment, routes, evaluate_objective(assignment, routes, n))


def solve_with_attrition(fleet: Fleet, costs, dead) -> Solution:
    """Optimum with the agents in ``dead`` removed from assignment and routing."""
    for a in sorted(set(dead)):
        if fleet.agents[a].alive:
            fleet = fleet.kill(a)
    if not fleet.alive_ids:
        raise ValidationError("all agents dead")
    return solve_centralized(fleet, costs)


def heuristic_solution(fleet: Fleet, costs, tie_seed: int = 0) -> Solution:
    """Voronoi allocation with nearest-neighbour tours (the adaptive heuristic at t=0)."""
    costs = np.asarray(costs)
    assignment = voronoi_partition(fleet, costs, tie_seed)
    routes = tuple(
        nn_tour(assignment.nodes_of(a), fleet.agents[a].origin, costs[a], a)
        for a in fleet.alive_ids
    )
    return Solution(assignment, routes, evaluate_objective(assignment, routes))


def approximation_ratio(heuristic: Solution, optimal: Solution) -> float:
    if optimal.objective <= TOL:
        if heuristic.objective <= TOL:
            return 1.0
        raise ValidationError("optimal objective is zero but heuristic is not; ratio undefined")
    return heuristic.objective / optimal.objective


def solution_to_csv(sol: Solution) -> tuple[str, str, str]:
    """Assignment CSV, route CSV and the ``objective,<seconds>`` record."""
    return assignment_to_csv(sol.assignment), routes_to_csv(sol.routes), f"objective,{sol.objective!r}\n"


def objective_from_csv(text: str) -> float:
    row = next(csv.reader(io.StringIO(text)))
    if row[0] != "objective":
        raise ValidationError("expected an 'objective,<seconds>' record")
    return float(row[1])
