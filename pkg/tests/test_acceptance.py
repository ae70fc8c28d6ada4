"""Acceptance gate: one test per criterion, summarised at the end of the run.

Each test carries ``@pytest.mark.acceptance(k, title)``; ``conftest.py``
prints one ``ACCEPTANCE k PASS|FAIL`` line per criterion.  Run alone with
``python3 tests/test_acceptance.py`` or ``pytest tests/test_acceptance.py``.
"""
from __future__ import annotations

import filecmp
import os
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from helpers import make_instance, post_recovery_excess
from oracles import brute_centralized, brute_tour
from voropatrol.allocation import (Fleet, changed_agents, intervals_from_csv, neighbor_set, neighbors,
                                   reallocate_after_attrition, voronoi_partition)
from voropatrol.cli import main
from voropatrol.experiments import bound_sweep, sweep_summary
from voropatrol.graph import PatrolGraph, all_pairs_shortest_paths, format_graph, random_graph, travel_costs
from voropatrol.oracle import heuristic_solution, solve_centralized
from voropatrol.routing import exact_tour, nn_tour
from voropatrol.sim import AttritionEvent, Scenario, run

acceptance = pytest.mark.acceptance


@pytest.fixture
def note(request):
    """Attach a detail line to this criterion's summary entry."""
    def add(text):
        request.node.user_properties.append(("detail", text))
    return add


def _read(path):
    with open(path) as fh:
        return fh.read()


# --------------------------------------------------------------------------

@acceptance(1, "MW-Voronoi counterexample")
def test_counterexample(tmp_path, note):
    t0 = time.perf_counter()
    assert main(["counterexample", "--out", str(tmp_path)]) == 0
    elapsed = time.perf_counter() - t0
    rows = intervals_from_csv(_read(tmp_path / "intervals.csv"))
    assert [w for _, _, w in rows] == [2, 0, 1, 2]
    for got, want in zip([hi for _, hi, _ in rows[:-1]], [Fraction(-2), Fraction(1, 2), Fraction(4, 3)]):
        assert abs(got - float(want)) <= 1e-12
    query = _read(tmp_path / "query.csv").splitlines()
    assert query[1:] == ["-1,0,1,2.0,0", "-1,0,2,1.5,1"]
    assert elapsed < 1.0
    note(f"boundaries -2, 1/2, 4/3; owners 2,0,1,2; x=-1 after loss: 2.0 s vs 1.5 s; {elapsed:.3f} s")


def _tie_heavy(rng, n):
    base = random_graph(n, rng)
    return PatrolGraph(n, tuple((i, j, float(rng.integers(1, 3))) for i, j, _ in base.edges))


@acceptance(2, "loss only changes neighbours of the lost agent")
def test_locality_suite(note):
    t0 = time.perf_counter()
    graphs = violations = 0
    for k in range(240):
        rng = np.random.default_rng([2, k])
        n = int(rng.integers(10, 61))
        m = int(rng.integers(3, 9))
        # every fourth graph has lengths in {1, 2} so equal times are common
        g = _tie_heavy(rng, n) if k % 4 == 3 else random_graph(n, rng)
        sp = all_pairs_shortest_paths(g)
        fleet = Fleet.from_origins(rng.choice(n, m, replace=False).tolist())
        costs = travel_costs(sp, fleet)
        assign = voronoi_partition(fleet, costs, tie_seed=k)
        rel = neighbors(assign, sp, fleet)
        lost = int(rng.integers(m))
        new, _ = reallocate_after_attrition(assign, lost, fleet, costs)
        if not changed_agents(assign, new) <= neighbor_set(rel, lost) | {lost}:
            violations += 1
        graphs += 1
    elapsed = time.perf_counter() - t0
    note(f"{graphs} graphs, {violations} violations, {elapsed:.1f} s")
    assert graphs >= 200
    assert violations == 0
    assert elapsed < 60


@acceptance(3, "exact solver matches factorial brute force")
def test_oracle_vs_brute_force(note):
    t0 = time.perf_counter()
    count = 0
    worst = 0.0
    for k in range(60):
        rng = np.random.default_rng([3, k])
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, min(3, n) + 1))
        _, fleet, _, costs = make_instance(int(rng.integers(1 << 30)), n, m)
        got = solve_centralized(fleet, costs).objective
        want = brute_centralized(n, fleet.origins.tolist(), [True] * m, costs)
        worst = max(worst, abs(got - want))
        assert got == pytest.approx(want, rel=1e-12, abs=1e-9)
        count += 1
    elapsed = time.perf_counter() - t0
    note(f"{count} instances, max |diff| {worst:.2e}, {elapsed:.1f} s")
    assert count >= 50 and elapsed < 300


@acceptance(4, "heuristic/optimal ratio within [1, m]")
def test_bound_sweep(note):
    t0 = time.perf_counter()
    rows, _ = bound_sweep(n=6, m_values=range(2, 7), instances=20, seed=0)
    elapsed = time.perf_counter() - t0
    table = sweep_summary(rows)
    lines = ["m  max_ratio  mean_ratio  instances"]
    lines += [f"{m}  {mx:.4f}  {mean:.4f}  {cnt}" for m, mx, mean, cnt in table]
    print("\n".join(lines))
    note("; ".join(lines[1:]) + f"; {elapsed:.1f} s")
    assert all(r.ratio >= 1.0 for r in rows)
    for m, mx, _, cnt in table:
        assert cnt >= 20
        assert mx <= m
    assert elapsed < 300


@acceptance(5, "static simulation reproduces the objective")
def test_static_sim_matches_objective(note):
    t0 = time.perf_counter()
    worst = 0.0
    worst_age = 0.0
    for k in range(20):
        rng = np.random.default_rng([5, k])
        n, m = int(rng.integers(8, 25)), int(rng.integers(1, 5))
        g, fleet, _, costs = make_instance(int(rng.integers(1 << 30)), n, m)
        z = heuristic_solution(fleet, costs, tie_seed=k).objective
        longest = max(r.cycle_time for r in heuristic_solution(fleet, costs, tie_seed=k).routes)
        sc = Scenario(g, fleet, horizon=max(50.0, 4 * longest), tie_seed=k)
        log = run(sc, record_trace=True)
        # idleness of a node = time span between its two latest visits
        worst = max(worst, abs(log.interval_idleness() - z))
        # time since last visit averages half of that span over a cycle
        worst_age = max(worst_age, abs(2 * log.window_idleness() - z))
    elapsed = time.perf_counter() - t0
    note(f"20 scenarios, max |interval idleness - z| {worst:.3f} s, "
         f"max |2 x mean age - z| {worst_age:.3f} s, {elapsed:.1f} s")
    assert worst <= 0.2 + 1e-9
    assert worst_age <= 0.2 + 1e-9
    assert elapsed < 120


@acceptance(6, "one message per loss")
@pytest.mark.parametrize("k", [0, 1, 2])
def test_message_count(k, note):
    g, fleet, _, _ = make_instance(11, 20, 4)
    events = tuple(AttritionEvent(30.0 * (e + 1), None) for e in range(k))
    log = run(Scenario(g, fleet, horizon=150.0, events=events, seed=k))
    note(f"k={k}: {log.total_messages} messages")
    assert log.total_messages == k


@acceptance(7, "idleness bounded after recovery")
@pytest.mark.parametrize("seed", range(6))
def test_recovery_bound(seed, note):
    g, fleet, _, _ = make_instance(seed, 25, 4)
    sc = Scenario(g, fleet, horizon=1000.0, tie_seed=seed, seed=seed,
                  events=(AttritionEvent(101.3, None), AttritionEvent(402.9, None)))
    log = run(sc, record_trace=True)
    excess = post_recovery_excess(log, sc)
    note(f"seed {seed}: worst idleness minus (cycle + 2 ticks) = {excess:.3f} s")
    assert all(rec.settle_time < sc.horizon for rec in log.attritions)
    assert excess <= 1e-9


def _cli_inputs(tmp_path):
    g, fleet, _, _ = make_instance(21, 7, 2)
    gpath = tmp_path / "g.txt"
    gpath.write_text(format_graph(g))
    origins = ",".join(map(str, fleet.origins.tolist()))
    spath = tmp_path / "s.txt"
    spath.write_text(f"graph {gpath}\nhorizon 40\nagent 0 {fleet.origins[0]} 1\n"
                     f"agent 1 {fleet.origins[1]} 2\nattrition 12 random\n")
    return str(gpath), origins, str(spath)


@acceptance(8, "byte-identical reruns")
@pytest.mark.parametrize("argv", [
    ["partition", "--graph", "{g}", "--origins", "{o}", "--speeds", "1,2"],
    ["route", "--graph", "{g}", "--origins", "{o}"],
    ["route", "--graph", "{g}", "--origins", "{o}", "--exact"],
    ["oracle", "--graph", "{g}", "--origins", "{o}"],
    ["simulate", "--scenario", "{s}", "--runs", "2"],
    ["bound-sweep", "--instances", "3"],
    ["counterexample"],
], ids=lambda a: "-".join(a[:1] + [x for x in a if x == "--exact"]))
def test_determinism(tmp_path, argv, note):
    g, o, s = _cli_inputs(tmp_path)
    outs = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        assert main([a.format(g=g, o=o, s=s) for a in argv] + ["--out", str(out)]) == 0
        outs.append(out)
    names = sorted(os.listdir(outs[0]))
    assert names and names == sorted(os.listdir(outs[1]))
    _, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], names, shallow=False)
    note(f"{argv[0]}: {len(names)} files identical" if not mismatch else f"{argv[0]}: {mismatch} differ")
    assert not mismatch and not errors


@acceptance(9, "exact tour <= nearest-neighbour tour, exact = factorial")
def test_tour_sandwich(note):
    sets = checked = 0
    for k in range(520):
        rng = np.random.default_rng([9, k])
        n = int(rng.integers(2, 13))
        _, fleet, _, costs = make_instance(int(rng.integers(1 << 30)), n, 1)
        origin = int(fleet.origins[0])
        size = int(rng.integers(1, min(10, n) + 1))
        others = [v for v in range(n) if v != origin]
        stops = sorted([origin] + rng.choice(others, size - 1, replace=False).tolist())
        ex = exact_tour(stops, origin, costs[0])
        nn = nn_tour(stops, origin, costs[0])
        assert ex.cycle_time <= nn.cycle_time
        if size <= 8:
            assert ex.cycle_time == pytest.approx(brute_tour(stops, origin, costs[0]), rel=1e-12, abs=1e-9)
            checked += 1
        sets += 1
    note(f"{sets} node sets, {checked} checked against permutations")
    assert sets >= 500


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", *sys.argv[1:]]))
