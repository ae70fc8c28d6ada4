import numpy as np

from voropatrol.allocation import Fleet
from voropatrol.graph import PatrolGraph, all_pairs_shortest_paths, random_graph, travel_costs


def path_graph(lengths):
    return PatrolGraph(len(lengths) + 1, tuple((k, k + 1, float(w)) for k, w in enumerate(lengths)))


def make_instance(seed, n, m, speeds=None, extra_edges=None):
    r = np.random.default_rng(seed)
    g = random_graph(n, r, extra_edges=extra_edges)
    fleet = Fleet.from_origins(r.choice(n, size=m, replace=False).tolist(), speeds)
    sp = all_pairs_shortest_paths(g)
    return g, fleet, sp, travel_costs(sp, fleet)


def line_graph(xs):
    """Path graph over sorted positions ``xs`` with edge length = spacing."""
    return PatrolGraph(len(xs), tuple((k, k + 1, float(xs[k + 1] - xs[k])) for k in range(len(xs) - 1)))


def post_recovery_excess(log, sc):
    """Largest idleness above the new owner's cycle (+2 ticks) after each event settles."""
    worst = -np.inf
    times = [rec.time for rec in log.attritions] + [sc.horizon]
    for rec, end in zip(log.attritions, times[1:]):
        if not rec.node_cycle:
            continue
        rows = (log.t >= rec.settle_time) & (log.t < end)
        if rows.any():
            worst = max(worst, float((log.trace[rows] - np.array(rec.node_cycle)).max()))
    return worst - 2 * sc.tick
