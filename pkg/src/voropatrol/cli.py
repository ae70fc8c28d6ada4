"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 validation, 3 cap exceeded.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import allocation, experiments, oracle, routing, sim
from .allocation import Fleet
from .errors import CapExceededError, PatrolError, ValidationError
from .graph import all_pairs_shortest_paths, load_graph, travel_costs

COUNTEREXAMPLE_AGENTS = ((0, 1), (1, 1), (2, 2))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _write(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _instance(args):
    try:
        g = load_graph(args.graph)
    except OSError as exc:
        raise ValidationError(f"cannot read graph file: {exc}") from None
    fleet = Fleet.from_origins(_ints(args.origins), _floats(args.speeds) if args.speeds else None)
    fleet.check_nodes(g.n)
    for a in _ints(args.dead or ""):
        fleet = fleet.kill(a)
    sp = all_pairs_shortest_paths(g)
    return g, fleet, sp, travel_costs(sp, fleet)


def cmd_partition(args) -> list[str]:
    g, fleet, sp, costs = _instance(args)
    assign = allocation.voronoi_partition(fleet, costs, args.seed)
    rel = allocation.neighbors(assign, sp, fleet)
    return [_write(args.out, "assignment.csv", allocation.assignment_to_csv(assign)),
            _write(args.out, "neighbors.csv", allocation.neighbors_to_csv(rel))]


def cmd_route(args) -> list[str]:
    g, fleet, sp, costs = _instance(args)
    assign = allocation.voronoi_partition(fleet, costs, args.seed)
    build = routing.exact_tour if args.exact else routing.nn_tour
    routes = [build(assign.nodes_of(a), fleet.agents[a].origin, costs[a], a) for a in fleet.alive_ids]
    z = oracle.evaluate_objective(assign, routes)
    return [_write(args.out, "assignment.csv", allocation.assignment_to_csv(assign)),
            _write(args.out, "routes.csv", routing.routes_to_csv(routes)),
            _write(args.out, "objective.csv", f"objective,{z!r}\n")]


def cmd_oracle(args) -> list[str]:
    g, fleet, sp, costs = _instance(args)
    best = oracle.solve_centralized(fleet, costs)
    heur = oracle.heuristic_solution(fleet, costs, args.seed)
    paths = []
    for tag, sol in (("optimal", best), ("heuristic", heur)):
        a_csv, r_csv, z_csv = oracle.solution_to_csv(sol)
        paths += [_write(args.out, f"{tag}_assignment.csv", a_csv),
                  _write(args.out, f"{tag}_routes.csv", r_csv),
                  _write(args.out, f"{tag}_objective.csv", z_csv)]
    ratio = oracle.approximation_ratio(heur, best)
    paths.append(_write(args.out, "ratio.csv", f"ratio,{ratio!r}\n"))
    return paths


def cmd_simulate(args) -> list[str]:
    scenario = sim.load_scenario(args.scenario)
    logs = sim.run_batch(scenario, args.runs, args.seed)
    return list(sim.report_batch(logs, args.out).values())


def cmd_bound_sweep(args) -> list[str]:
    if args.n > oracle.MAX_NODES or args.m_max > oracle.MAX_AGENTS:
        raise CapExceededError(f"sweep needs n <= {oracle.MAX_NODES} and m <= {oracle.MAX_AGENTS}")
    if not 1 <= args.m_min <= args.m_max <= args.n:
        raise ValidationError("need 1 <= m-min <= m-max <= n")
    rows, losses = experiments.bound_sweep(args.n, range(args.m_min, args.m_max + 1),
                                           args.instances, args.seed)
    summary = experiments.sweep_summary(rows)
    return [_write(args.out, "ratios.csv", experiments.sweep_to_csv(rows)),
            _write(args.out, "ratio_summary.csv", experiments.summary_to_csv(summary)),
            _write(args.out, "attrition_ratios.csv", experiments.attrition_to_csv(losses))]


def cmd_counterexample(args) -> list[str]:
    agents = COUNTEREXAMPLE_AGENTS
    times = allocation.line_times(-1, agents, dead={0})
    owner = allocation.line_owner(-1, agents, dead={0})
    query = "x,dead,agent,time_s,owner\n" + "".join(
        f"-1,0,{a},{float(t)!r},{int(a == owner)}\n" for a, t in sorted(times.items()))
    return [
        _write(args.out, "intervals.csv", allocation.intervals_to_csv(allocation.mw_voronoi_line(agents))),
        _write(args.out, "intervals_agent0_dead.csv",
               allocation.intervals_to_csv(allocation.mw_voronoi_line(agents, dead={0}))),
        _write(args.out, "query.csv", query),
    ]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="voropatrol", description="Voronoi-allocation patrolling toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def instance_args(sp):
        sp.add_argument("--graph", required=True, help="graph file")
        sp.add_argument("--origins", required=True, help="comma-separated origin node per agent")
        sp.add_argument("--speeds", help="comma-separated speeds (default all 1)")
        sp.add_argument("--dead", help="comma-separated agents to remove")
        sp.add_argument("--seed", type=int, default=0, help="tie-break seed")
        sp.add_argument("--out", default=".")

    sp = sub.add_parser("partition", help="Voronoi allocation and neighbour relation")
    instance_args(sp)
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("route", help="allocation plus per-agent tours")
    instance_args(sp)
    sp.add_argument("--exact", action="store_true", help="exact tours instead of nearest-neighbour")
    sp.set_defaults(func=cmd_route)

    sp = sub.add_parser("oracle", help="exact optimum vs heuristic on a small instance")
    instance_args(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("simulate", help="run a scenario file")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--seed", type=int, default=None, help="override the scenario's attrition seed")
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("bound-sweep", help="heuristic/optimal ratios on random toy instances")
    sp.add_argument("--n", type=int, default=6)
    sp.add_argument("--m-min", type=int, default=2)
    sp.add_argument("--m-max", type=int, default=6)
    sp.add_argument("--instances", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_bound_sweep)

    sp = sub.add_parser("counterexample", help="heterogeneous-speed line partition")
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_counterexample)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        paths = args.func(args)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (PatrolError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
