"""Deterministic fixed-tick patrol simulator with scripted attrition.

Every alive agent loops over its tour.  When an agent is lost, one message
is counted, the survivors re-partition the graph from their fixed origins,
and only agents whose node set changed plan a new nearest-neighbour tour.
They finish the leg in progress first and start the new tour from the node
they arrive at.
"""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .allocation import (Assignment, Fleet, changed_agents, neighbor_set, neighbors,
                         reallocate_after_attrition, voronoi_partition)
from .errors import ValidationError
from .graph import PatrolGraph, ShortestPaths, all_pairs_shortest_paths, load_graph, travel_costs
from .routing import Route, nn_tour

CSV_HEADER = ["t", "avg_idleness", "std_idleness", "messages"]


@dataclass(frozen=True)
class AttritionEvent:
    time: float
    agent: int | None = None  # None: pick uniformly among alive agents


@dataclass(frozen=True)
class Scenario:
    graph: PatrolGraph
    fleet: Fleet
    horizon: float
    tick: float = 0.1
    tie_seed: int = 0
    events: tuple[AttritionEvent, ...] = ()
    seed: int = 0
    graph_path: str | None = None

    def __post_init__(self):
        if not self.tick > 0:
            raise ValidationError("tick must be positive")
        if not self.horizon >= 0 or not math.isfinite(self.horizon):
            raise ValidationError("horizon must be a finite non-negative number")
        self.fleet.check_nodes(self.graph.n)
        events = tuple(sorted(self.events, key=lambda e: e.time))
        object.__setattr__(self, "events", events)
        for e in events:
            if not 0 <= e.time <= self.horizon:
                raise ValidationError(f"attrition at {e.time} s lies outside [0, {self.horizon}]")
            if e.agent is not None and not 0 <= e.agent < self.fleet.m:
                raise ValidationError(f"attrition names unknown agent {e.agent}")
        named = [e.agent for e in events if e.agent is not None]
        if len(set(named)) != len(named):
            raise ValidationError("an agent can only be lost once")
        if len(events) > len(self.fleet.alive_ids):
            raise ValidationError("more attrition events than agents")

    @property
    def n_ticks(self) -> int:
        return int(round(self.horizon / self.tick))


def parse_scenario(text: str, base_dir: str = ".") -> Scenario:
    """Parse a scenario file.

    Records: ``graph <path>``, ``horizon <s>``, ``tick <s>``, ``tie_seed <int>``,
    ``seed <int>``, ``agent <id> <origin> <speed>`` (repeated) and
    ``attrition <t> <agent|random>`` (repeated).  ``#`` starts a comment.
    """
    keys: dict[str, str] = {}
    agents = []
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag in ("graph", "horizon", "tick", "tie_seed", "seed"):
                if len(parts) != 2:
                    raise ValueError(f"expected '{tag} <value>'")
                if tag in keys:
                    raise ValueError(f"'{tag}' given twice")
                keys[tag] = parts[1]
            elif tag == "agent":
                if len(parts) != 4:
                    raise ValueError("expected 'agent <id> <origin> <speed>'")
                agents.append((int(parts[1]), int(parts[2]), float(parts[3])))
            elif tag == "attrition":
                if len(parts) != 3:
                    raise ValueError("expected 'attrition <t> <agent|random>'")
                who = None if parts[2] == "random" else int(parts[2])
                events.append(AttritionEvent(float(parts[1]), who))
            else:
                raise ValueError(f"unknown record {tag!r}")
        except ValueError as exc:
            raise ValidationError(f"scenario line {lineno}: {exc}") from None
    for required in ("graph", "horizon"):
        if required not in keys:
            raise ValidationError(f"scenario is missing '{required}'")
    if not agents:
        raise ValidationError("scenario has no agents")
    agents.sort()
    if [a[0] for a in agents] != list(range(len(agents))):
        raise ValidationError("agent ids must be 0..m-1")
    fleet = Fleet.from_origins([a[1] for a in agents], [a[2] for a in agents])
    path = keys["graph"]
    if not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    try:
        graph = load_graph(path)
    except OSError as exc:
        raise ValidationError(f"cannot read graph file: {exc}") from None
    def number(key, kind, default):
        try:
            return kind(keys.get(key, default))
        except ValueError:
            raise ValidationError(f"scenario: bad value for '{key}': {keys[key]!r}") from None

    return Scenario(graph, fleet, horizon=number("horizon", float, None), tick=number("tick", float, 0.1),
                    tie_seed=number("tie_seed", int, 0), events=tuple(events),
                    seed=number("seed", int, 0), graph_path=keys["graph"])


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), os.path.dirname(os.path.abspath(path)))


@dataclass(frozen=True)
class AttritionRecord:
    time: float
    agent: int
    messages: int
    changed: tuple[int, ...]       # survivors whose node set changed (and re-toured)
    neighbors: tuple[int, ...]     # neighbours of the lost agent before the loss
    settle_time: float = math.inf  # every re-toured agent has run one full new cycle
    node_cycle: tuple[float, ...] = ()  # cycle time of each node's new owner


@dataclass
class MetricsLog:
    t: np.ndarray
    avg_idleness: np.ndarray
    std_idleness: np.ndarray
    messages: np.ndarray
    tick: float
    attritions: list[AttritionRecord] = field(default_factory=list)
    node_counts: tuple[int, ...] = ()
    routes: dict[int, Route] = field(default_factory=dict)
    owner: np.ndarray | None = None
    last_interval: np.ndarray | None = None
    visit_count: np.ndarray | None = None
    trace: np.ndarray | None = None

    @property
    def mean_idleness(self) -> float:
        return float(self.avg_idleness.mean()) if self.avg_idleness.size else float("nan")

    @property
    def max_idleness(self) -> float:
        return float(self.avg_idleness.max()) if self.avg_idleness.size else float("nan")

    @property
    def total_messages(self) -> int:
        return int(self.messages[-1]) if self.messages.size else 0

    def interval_idleness(self) -> float:
        """Mean over nodes of the latest gap between consecutive visits."""
        return float(self.last_interval.mean())

    def window_idleness(self) -> float:
        """Instantaneous idleness averaged over each agent's last full cycle.

        Needs a run with ``record_trace=True``.  Node-weighted over agents;
        for a periodic tour this is about half the cycle time.
        """
        if self.trace is None:
            raise ValueError("run the simulation with record_trace=True")
        total = 0.0
        for a, r in self.routes.items():
            nodes = np.flatnonzero(self.owner == a)
            span = max(1, int(math.ceil(r.cycle_time / self.tick - 1e-9)))
            total += self.trace[-span:, nodes].mean() * nodes.size
        return total / self.owner.size


class SimState:
    """Mutable simulator state; arrays are shared with the advance kernel."""

    def __init__(self, scenario: Scenario, sp: ShortestPaths | None = None, seed: int | None = None):
        self.scenario = scenario
        g = scenario.graph
        n, m = g.n, scenario.fleet.m
        self.sp = sp if sp is not None else all_pairs_shortest_paths(g)
        self.dist = np.ascontiguousarray(self.sp.dist)
        self.fleet = scenario.fleet
        self.costs = travel_costs(self.dist, self.fleet)
        self.speed = self.fleet.speeds
        self.rng = np.random.default_rng(scenario.seed if seed is None else seed)
        self.k = 0
        self.messages = 0
        self.attritions: list[AttritionRecord] = []

        self.alive = self.fleet.alive.copy()
        self.route = np.zeros((m, n + 1), dtype=np.int64)
        self.route_len = np.ones(m, dtype=np.int64)
        self.pend_route = np.zeros((m, n + 1), dtype=np.int64)
        self.pend_len = np.zeros(m, dtype=np.int64)
        self.pending = np.zeros(m, dtype=np.bool_)
        self.pos = np.zeros(m, dtype=np.int64)
        self.progress = np.zeros(m, dtype=np.float64)
        self.last_visit = np.zeros(n, dtype=np.float64)
        self.last_interval = np.zeros(n, dtype=np.float64)
        self.visit_count = np.zeros(n, dtype=np.int64)
        self.plans: dict[int, Route] = {}

        self.assignment: Assignment | None = None
        if self.fleet.alive_ids:
            self.assignment = voronoi_partition(self.fleet, self.costs, scenario.tie_seed)
            for a in self.fleet.alive_ids:
                r = nn_tour(self.assignment.nodes_of(a), self.fleet.agents[a].origin, self.costs[a], a)
                self._install(a, r)

    @property
    def clock(self) -> float:
        return self.k * self.scenario.tick

    def idleness(self) -> np.ndarray:
        return self.clock - self.last_visit

    def _install(self, a: int, r: Route) -> None:
        self.route[a, :len(r)] = r.order
        self.route_len[a] = len(r)
        self.pos[a] = 0
        self.progress[a] = 0.0
        self.pending[a] = False
        self.plans[a] = r

    def _schedule(self, a: int, r: Route) -> None:
        self.pend_route[a, :len(r)] = r.order
        self.pend_len[a] = len(r)
        self.pending[a] = True
        self.plans[a] = r

    def next_stop(self, a: int) -> int:
        """Node the agent is heading to (its own node if stationary)."""
        length = self.route_len[a]
        if length == 1:
            return int(self.route[a, 0])
        return int(self.route[a, (self.pos[a] + 1) % length])

    def advance(self, k1: int, avg, std, trace) -> None:
        advance = kernels.advance
        advance(self.k, k1, self.scenario.tick, self.dist, self.speed, self.alive,
                self.route, self.route_len, self.pend_route, self.pend_len, self.pending,
                self.pos, self.progress, self.last_visit, self.last_interval,
                self.visit_count, avg, std, trace)
        self.k = k1


def inject_attrition(state: SimState, agent: int) -> SimState:
    """Lose ``agent`` now: one message, re-partition, selective re-tour."""
    if not 0 <= agent < state.fleet.m or not state.alive[agent]:
        raise ValidationError(f"agent {agent} is not alive")
    state.messages += 1
    state.alive[agent] = False
    state.pending[agent] = False
    state.plans.pop(agent, None)
    old = state.assignment
    survivors = [a for a in state.fleet.alive_ids if a != agent]
    if not survivors:
        state.fleet = state.fleet.kill(agent)
        state.assignment = None
        state.attritions.append(AttritionRecord(state.clock, agent, state.messages, (), ()))
        return state
    near = neighbor_set(neighbors(old, state.sp, state.fleet), agent)
    new, state.fleet = reallocate_after_attrition(old, agent, state.fleet, state.costs,
                                                  state.scenario.tie_seed)
    changed = sorted(changed_agents(old, new) - {agent})
    settle = state.clock
    for a in changed:
        start = state.next_stop(a)
        r = nn_tour(new.nodes_of(a), start, state.costs[a], a)
        remaining = 0.0
        if state.route_len[a] == 1:
            state._install(a, r)
        else:
            here = state.route[a, state.pos[a]]
            remaining = max(0.0, state.costs[a, here, start] - state.progress[a])
            state._schedule(a, r)
        settle = max(settle, state.clock + remaining + r.cycle_time + state.scenario.tick)
    state.assignment = new
    node_cycle = tuple(state.plans[int(a)].cycle_time for a in new.owner)
    state.attritions.append(AttritionRecord(state.clock, agent, state.messages, tuple(changed),
                                            tuple(sorted(near)), settle, node_cycle))
    return state


def _event_tick(time: float, tick: float) -> int:
    return max(0, math.ceil(time / tick - 1e-9))


def run(scenario: Scenario, seed: int | None = None, record_trace: bool = False,
        sp: ShortestPaths | None = None) -> MetricsLog:
    """Simulate ``scenario`` to its horizon; one metrics row per tick."""
    state = SimState(scenario, sp=sp, seed=seed)
    n_ticks = scenario.n_ticks
    n = scenario.graph.n
    avg = np.zeros(n_ticks)
    std = np.zeros(n_ticks)
    trace = np.zeros((n_ticks if record_trace else 0, n))
    at_tick: dict[int, list[AttritionEvent]] = {}
    for e in scenario.events:
        at_tick.setdefault(min(_event_tick(e.time, scenario.tick), n_ticks), []).append(e)
    msg_ticks = []
    for k in sorted(at_tick):
        if k > state.k:
            state.advance(k, avg, std, trace)
        for e in at_tick[k]:
            who = e.agent
            if who is None:
                live = np.flatnonzero(state.alive)
                who = int(live[state.rng.integers(live.size)])
            inject_attrition(state, who)
            msg_ticks.append(k)
    if n_ticks > state.k:
        state.advance(n_ticks, avg, std, trace)

    t = np.arange(1, n_ticks + 1) * scenario.tick
    messages = np.searchsorted(np.array(msg_ticks, dtype=np.int64), np.arange(1, n_ticks + 1), side="right")
    counts = state.assignment.counts() if state.assignment is not None else np.zeros(scenario.fleet.m, int)
    return MetricsLog(
        t=t, avg_idleness=avg, std_idleness=std, messages=messages.astype(np.int64),
        tick=scenario.tick, attritions=state.attritions,
        node_counts=tuple(int(c) for c in counts), routes=dict(state.plans),
        owner=None if state.assignment is None else state.assignment.owner.copy(),
        last_interval=state.last_interval.copy(), visit_count=state.visit_count.copy(),
        trace=trace if record_trace else None,
    )


def run_batch(scenario: Scenario, runs: int, seed: int | None = None) -> list[MetricsLog]:
    """``runs`` simulations; run ``r`` draws random attrition with ``seed + r``."""
    if runs < 1:
        raise ValidationError("runs must be at least 1")
    base = scenario.seed if seed is None else seed
    return [run(scenario, seed=base + r) for r in range(runs)]


def average_logs(logs: list[MetricsLog]) -> MetricsLog:
    first = logs[0]
    return MetricsLog(
        t=first.t.copy(),
        avg_idleness=np.mean([l.avg_idleness for l in logs], axis=0),
        std_idleness=np.mean([l.std_idleness for l in logs], axis=0),
        messages=np.mean([l.messages for l in logs], axis=0),
        tick=first.tick,
    )


# --------------------------------------------------------------------------
# reporting
# --------------------------------------------------------------------------

def log_to_csv(log: MetricsLog) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    integral = np.all(log.messages == np.round(log.messages))
    for t, a, s, msg in zip(log.t, log.avg_idleness, log.std_idleness, log.messages):
        w.writerow([repr(float(t)), repr(float(a)), repr(float(s)),
                    int(msg) if integral else repr(float(msg))])
    return buf.getvalue()


def log_from_csv(text: str, tick: float = 0.0) -> MetricsLog:
    rows = list(csv.DictReader(io.StringIO(text)))
    col = lambda k: np.array([float(r[k]) for r in rows])
    return MetricsLog(col("t"), col("avg_idleness"), col("std_idleness"), col("messages"), tick)


def summary_text(log: MetricsLog) -> str:
    lines = [
        "idleness_metric,instantaneous (time since last visit, averaged over nodes)",
        f"ticks,{log.t.size}",
        f"mean_avg_idleness,{log.mean_idleness!r}",
        f"max_avg_idleness,{log.max_idleness!r}",
        f"messages,{log.total_messages}",
    ]
    if log.node_counts:
        lines.append("agent_nodes," + " ".join(f"{a}:{c}" for a, c in enumerate(log.node_counts)))
    for rec in log.attritions:
        lines.append(f"attrition,t={rec.time!r} agent={rec.agent} retoured={list(rec.changed)} "
                     f"neighbors={list(rec.neighbors)}")
    return "\n".join(lines) + "\n"


def report(log: MetricsLog, out_dir, name: str = "run") -> dict[str, str]:
    """Write ``<name>.csv`` and ``<name>_summary.txt``; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {"csv": os.path.join(out_dir, f"{name}.csv"),
             "summary": os.path.join(out_dir, f"{name}_summary.txt")}
    with open(paths["csv"], "w", encoding="utf-8", newline="") as fh:
        fh.write(log_to_csv(log))
    with open(paths["summary"], "w", encoding="utf-8") as fh:
        fh.write(summary_text(log))
    return paths


def report_batch(logs: list[MetricsLog], out_dir) -> dict[str, str]:
    """Per-run CSVs and summaries plus ``average.csv`` / ``average_summary.txt``."""
    paths = {}
    for r, log in enumerate(logs):
        for kind, p in report(log, out_dir, f"run{r}").items():
            paths[f"run{r}_{kind}"] = p
    for kind, p in report(average_logs(logs), out_dir, "average").items():
        paths[f"average_{kind}"] = p
    return paths
