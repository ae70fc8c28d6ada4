"""Closed patrol tours over an agent's assigned nodes."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CapExceededError, ValidationError
from .graph import TOL

EXACT_CAP = 14


@dataclass(frozen=True)
class Route:
    """Closed tour starting (and implicitly ending) at ``order[0]``.

    ``visit_times[k]`` is the arrival time at ``order[k]``; ``cycle_time``
    includes the return leg.
    """

    agent: int
    order: tuple[int, ...]
    visit_times: tuple[float, ...]
    cycle_time: float

    @property
    def origin(self) -> int:
        return self.order[0]

    def __len__(self):
        return len(self.order)


def _cost_matrix(cost) -> np.ndarray:
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValidationError("cost must be a square (n, n) matrix for one agent")
    return cost


def _stops(assigned, origin: int) -> list[int]:
    return sorted(set(int(i) for i in assigned) - {int(origin)})


def route_from_order(order, cost, agent: int = 0) -> Route:
    cost = _cost_matrix(cost)
    order = tuple(int(i) for i in order)
    legs = [float(cost[u, v]) for u, v in zip(order, order[1:] + order[:1])]
    times = [0.0]
    for leg in legs[:-1]:
        times.append(times[-1] + leg)
    # correctly rounded, so a tour and its reverse get the same cycle time
    cycle = math.fsum(legs) if len(order) > 1 else 0.0
    return Route(agent, order, tuple(times), cycle)


def nn_tour(assigned, origin: int, cost, agent: int = 0) -> Route:
    """Nearest-neighbour tour from ``origin``; ties go to the lowest node id."""
    cost = _cost_matrix(cost)
    left = _stops(assigned, origin)
    order = [int(origin)]
    while left:
        here = order[-1]
        row = cost[here, left]
        k = int(np.flatnonzero(row <= row.min() + TOL)[0])
        order.append(left.pop(k))
    return route_from_order(order, cost, agent)


def exact_tour(assigned, origin: int, cost, agent: int = 0) -> Route:
    """Minimum-cycle-time tour by subset dynamic programming."""
    cost = _cost_matrix(cost)
    assigned = set(int(i) for i in assigned)
    if len(assigned) > EXACT_CAP:
        raise CapExceededError(f"exact tour limited to {EXACT_CAP} assigned nodes, got {len(assigned)}")
    stops = _stops(assigned, origin)
    idx = np.array([origin] + stops, dtype=np.int64)
    _, perm = kernels.held_karp(np.ascontiguousarray(cost[np.ix_(idx, idx)]))
    best = route_from_order([int(origin)] + idx[perm].tolist(), cost, agent)
    # equal-length tours can round differently; never lose to the greedy tour
    greedy = nn_tour(assigned, origin, cost, agent)
    return greedy if greedy.cycle_time < best.cycle_time else best


def cycle_time(route: Route, cost) -> float:
    """Recompute the cycle time of ``route`` under ``cost``."""
    return route_from_order(route.order, cost, route.agent).cycle_time


def check_route(route: Route, assigned, origin: int) -> None:
    """Raise if ``route`` is not a valid closed tour of ``assigned``."""
    want = set(int(i) for i in assigned) | {int(origin)}
    if route.order[0] != origin:
        raise ValidationError("route must start at the origin")
    if len(set(route.order)) != len(route.order) or set(route.order) != want:
        raise ValidationError("route must visit every assigned node exactly once")
    if route.visit_times[0] != 0.0:
        raise ValidationError("origin visit time must be zero")
    if any(b <= a for a, b in zip(route.visit_times, route.visit_times[1:])):
        raise ValidationError("visit times must be strictly increasing")


def routes_to_csv(routes) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["agent", "seq", "node", "visit_time"])
    for r in routes:
        for seq, (node, t) in enumerate(zip(r.order, r.visit_times)):
            w.writerow([r.agent, seq, node, repr(float(t))])
    return buf.getvalue()


def routes_from_csv(text: str, costs) -> list[Route]:
    """Parse route rows back into :class:`Route` objects.

    ``costs`` is the ``(m, n, n)`` travel-time array used to restore cycle
    times (the CSV only carries the stops).
    """
    orders: dict[int, list[tuple[int, int]]] = {}
    for r in csv.DictReader(io.StringIO(text)):
        orders.setdefault(int(r["agent"]), []).append((int(r["seq"]), int(r["node"])))
    out = []
    for agent in sorted(orders):
        order = [node for _, node in sorted(orders[agent])]
        out.append(route_from_order(order, costs[agent], agent))
    return out
