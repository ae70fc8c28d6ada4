"""Seeded instance generation and the heuristic-vs-optimal sweeps."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .allocation import Fleet
from .graph import PatrolGraph, all_pairs_shortest_paths, random_graph, travel_costs
from .oracle import approximation_ratio, heuristic_solution, solve_centralized


def instance_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([seed, *keys])


def random_instance(n: int, m: int, rng: np.random.Generator, speeds=None,
                    extra_edges: int | None = None) -> tuple[PatrolGraph, Fleet]:
    """Connected random graph (lengths U[1, 10]) and ``m`` agents on distinct origins."""
    g = random_graph(n, rng, extra_edges=extra_edges)
    origins = rng.choice(n, size=m, replace=False).tolist()
    return g, Fleet.from_origins(origins, speeds)


@dataclass(frozen=True)
class SweepRow:
    m: int
    instance: int
    heuristic_z: float
    optimal_z: float
    ratio: float


@dataclass(frozen=True)
class AttritionRow:
    m: int
    instance: int
    lost: int
    before_z: float
    after_z: float
    ratio: float
    optimal_after_z: float


def bound_sweep(n: int = 6, m_values=range(2, 7), instances: int = 20, seed: int = 0):
    """Heuristic vs exact optimum on random toy instances, plus one-loss ratios."""
    rows, losses = [], []
    for m in m_values:
        for k in range(instances):
            rng = instance_rng(seed, n, m, k)
            g, fleet = random_instance(n, m, rng)
            costs = travel_costs(all_pairs_shortest_paths(g), fleet)
            h = heuristic_solution(fleet, costs)
            opt = solve_centralized(fleet, costs)
            rows.append(SweepRow(m, k, h.objective, opt.objective, approximation_ratio(h, opt)))
            if m < 2:
                continue
            lost = int(rng.integers(m))
            survivors = fleet.kill(lost)
            after = heuristic_solution(survivors, costs)
            ratio = after.objective / h.objective if h.objective > 0 else float("nan")
            losses.append(AttritionRow(m, k, lost, h.objective, after.objective, ratio,
                                       solve_centralized(survivors, costs).objective))
    return rows, losses


def sweep_summary(rows: list[SweepRow]) -> list[tuple[int, float, float, int]]:
    """``(m, max_ratio, mean_ratio, instances)`` per agent count."""
    out = []
    for m in sorted({r.m for r in rows}):
        ratios = [r.ratio for r in rows if r.m == m]
        out.append((m, max(ratios), float(np.mean(ratios)), len(ratios)))
    return out


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def sweep_to_csv(rows: list[SweepRow]) -> str:
    return _csv(["m", "instance", "heuristic_z", "optimal_z", "ratio"],
                [(r.m, r.instance, r.heuristic_z, r.optimal_z, r.ratio) for r in rows])


def summary_to_csv(summary) -> str:
    return _csv(["m", "max_ratio", "mean_ratio", "instances"], summary)


def attrition_to_csv(rows: list[AttritionRow]) -> str:
    return _csv(["m", "instance", "lost", "before_z", "after_z", "ratio", "m_over_m_minus_1",
                 "optimal_after_z"],
                [(r.m, r.instance, r.lost, r.before_z, r.after_z, r.ratio,
                  r.m / (r.m - 1), r.optimal_after_z) for r in rows])


def sweep_from_csv(text: str) -> list[SweepRow]:
    return [SweepRow(int(r["m"]), int(r["instance"]), float(r["heuristic_z"]),
                     float(r["optimal_z"]), float(r["ratio"]))
            for r in csv.DictReader(io.StringIO(text))]
