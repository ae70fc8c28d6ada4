"""Graph-Voronoi allocation of nodes to agents and attrition handling."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .graph import TOL, ShortestPaths, travel_costs

_U64 = np.uint64


@dataclass(frozen=True)
class Agent:
    id: int
    origin: int
    speed: float = 1.0
    alive: bool = True


@dataclass(frozen=True)
class Fleet:
    agents: tuple[Agent, ...]

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        if not self.agents:
            raise ValidationError("fleet has no agents")
        for k, a in enumerate(self.agents):
            if a.id != k:
                raise ValidationError(f"agent ids must be 0..m-1 in order, got {a.id} at {k}")
            if not a.speed > 0 or not math.isfinite(a.speed):
                raise ValidationError(f"agent {a.id}: speed must be positive")
        origins = [a.origin for a in self.agents]
        if len(set(origins)) != len(origins):
            raise ValidationError("agent origins must be distinct")

    @classmethod
    def from_origins(cls, origins, speeds=None) -> Fleet:
        if speeds is None:
            speeds = [1.0] * len(origins)
        if len(speeds) != len(origins):
            raise ValidationError("need one speed per origin")
        return cls(tuple(Agent(k, int(o), float(s)) for k, (o, s) in enumerate(zip(origins, speeds))))

    def check_nodes(self, n: int) -> None:
        for a in self.agents:
            if not 0 <= a.origin < n:
                raise ValidationError(f"agent {a.id}: origin {a.origin} not in graph")

    @property
    def m(self) -> int:
        return len(self.agents)

    @property
    def origins(self) -> np.ndarray:
        return np.array([a.origin for a in self.agents], dtype=np.int64)

    @property
    def speeds(self) -> np.ndarray:
        return np.array([a.speed for a in self.agents], dtype=np.float64)

    @property
    def alive(self) -> np.ndarray:
        return np.array([a.alive for a in self.agents], dtype=bool)

    @property
    def alive_ids(self) -> list[int]:
        return [a.id for a in self.agents if a.alive]

    def kill(self, agent: int) -> Fleet:
        if not 0 <= agent < self.m:
            raise ValidationError(f"unknown agent {agent}")
        if not self.agents[agent].alive:
            raise ValidationError(f"agent {agent} is already dead")
        agents = list(self.agents)
        agents[agent] = replace(agents[agent], alive=False)
        return Fleet(tuple(agents))

    def homogeneous(self) -> bool:
        s = self.speeds[self.alive]
        return bool(np.all(s == s[0])) if s.size else True


class Assignment:
    """Exactly-one allocation of nodes to alive agents.

    ``owner[i]`` is the agent holding node ``i``; :attr:`y` gives the binary
    ``m x n`` matrix view.
    """

    __slots__ = ("owner", "m", "tie_seed")

    def __init__(self, owner, m: int, tie_seed: int = 0):
        owner = np.array(owner, dtype=np.int64)
        if owner.ndim != 1 or owner.size == 0:
            raise ValidationError("owner vector must be 1-d and non-empty")
        if np.any((owner < 0) | (owner >= m)):
            raise ValidationError("owner references unknown agent")
        owner.setflags(write=False)
        self.owner = owner
        self.m = int(m)
        self.tie_seed = int(tie_seed)

    @property
    def n(self) -> int:
        return self.owner.size

    @property
    def y(self) -> np.ndarray:
        y = np.zeros((self.m, self.n), dtype=np.int8)
        y[self.owner, np.arange(self.n)] = 1
        return y

    def nodes_of(self, agent: int) -> list[int]:
        return np.flatnonzero(self.owner == agent).tolist()

    def counts(self) -> np.ndarray:
        return np.bincount(self.owner, minlength=self.m)

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.owner, other.owner)

    def __hash__(self):
        return hash((self.m, self.owner.tobytes()))

    def __repr__(self):
        return f"Assignment(owner={self.owner.tolist()}, m={self.m}, tie_seed={self.tie_seed})"


# --------------------------------------------------------------------------
# tie rule
# --------------------------------------------------------------------------

def tie_rank(tie_seed: int, nodes, agents) -> np.ndarray:
    """Pseudo-random rank of ``agent`` at ``node`` (splitmix64 finaliser).

    Ties are won by the lowest rank.  Because the rank of a pair does not
    depend on which other agents are alive, removing a losing agent never
    changes the winner.
    """
    nodes = np.asarray(nodes, dtype=np.int64).astype(_U64)
    agents = np.asarray(agents, dtype=np.int64).astype(_U64)
    seed = np.asarray(tie_seed & 0xFFFFFFFFFFFFFFFF, dtype=_U64)
    with np.errstate(over="ignore"):
        x = seed * _U64(0x9E3779B97F4A7C15) + nodes * _U64(0xBF58476D1CE4E5B9)
        x = x ^ (agents * _U64(0x94D049BB133111EB) + _U64(0x632BE59BD9B4E019))
        x = (x ^ (x >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> _U64(27))) * _U64(0x94D049BB133111EB)
        x = x ^ (x >> _U64(31))
    return x


def _origin_costs(fleet: Fleet, costs: np.ndarray) -> np.ndarray:
    """``out[a, i]`` = travel time of agent ``a`` between node ``i`` and its origin."""
    costs = np.asarray(costs)
    if costs.ndim != 3 or costs.shape[0] != fleet.m:
        raise ValidationError("cost array must have shape (m, n, n)")
    fleet.check_nodes(costs.shape[1])
    out = costs[np.arange(fleet.m), :, fleet.origins].copy()
    out[~fleet.alive] = np.inf
    return out


def _winners(t: np.ndarray, nodes: np.ndarray, tie_seed: int) -> np.ndarray:
    best = t.min(axis=0)
    tied = t <= best + TOL
    ranks = tie_rank(tie_seed, nodes[None, :], np.arange(t.shape[0])[:, None])
    ranks = np.where(tied, ranks, np.iinfo(np.uint64).max)
    return np.argmin(ranks, axis=0)


def optimal_agent(i: int, fleet: Fleet, costs, tie_seed: int = 0) -> int:
    if not fleet.alive_ids:
        raise ValidationError("no alive agents")
    t = _origin_costs(fleet, costs)[:, [i]]
    return int(_winners(t, np.array([i]), tie_seed)[0])


def voronoi_partition(fleet: Fleet, costs, tie_seed: int = 0) -> Assignment:
    """Assign every node to the alive agent that reaches it soonest."""
    if not fleet.alive_ids:
        raise ValidationError("no alive agents")
    t = _origin_costs(fleet, costs)
    owner = _winners(t, np.arange(t.shape[1]), tie_seed)
    return Assignment(owner, fleet.m, tie_seed)


def reallocate_after_attrition(assign: Assignment, lost: int, fleet: Fleet, costs,
                               tie_seed: int | None = None) -> tuple[Assignment, Fleet]:
    """Re-partition with ``lost`` removed; returns the new assignment and fleet."""
    if not 0 <= lost < fleet.m:
        raise ValidationError(f"unknown agent {lost}")
    if not fleet.agents[lost].alive:
        raise ValidationError(f"agent {lost} is already dead")
    survivors = fleet.kill(lost)
    if not survivors.alive_ids:
        raise ValidationError("no surviving agents to take over")
    seed = assign.tie_seed if tie_seed is None else tie_seed
    return voronoi_partition(survivors, costs, seed), survivors


def changed_agents(old: Assignment, new: Assignment) -> set[int]:
    if old.n != new.n:
        raise ValidationError("assignments cover different node sets")
    diff = old.owner != new.owner
    return set(old.owner[diff].tolist()) | set(new.owner[diff].tolist())


# --------------------------------------------------------------------------
# neighbour relation
# --------------------------------------------------------------------------

def closed_cells(fleet: Fleet, costs) -> np.ndarray:
    """``out[a, i]``: alive agent ``a`` attains the minimum travel time at node ``i``.

    Unlike the assignment, a tied node belongs to every agent in the tie.
    """
    t = _origin_costs(fleet, costs)
    return t <= t.min(axis=0) + TOL


def neighbors(assign: Assignment, sp: ShortestPaths, fleet: Fleet, rule: str = "some-pair") -> np.ndarray:
    """Symmetric ``m x m`` boolean neighbour relation between agents.

    Agents ``a`` and ``b`` are neighbours when there are nodes ``i`` owned
    by ``a`` and ``j`` owned by ``b`` such that every node on every shortest
    i-j path lies in the closed cell of ``a`` or of ``b`` (see
    :func:`closed_cells`).

    ``rule="every-pair"`` demands this for all such pairs instead.  That
    reading is far stricter and is kept for comparison only; the
    attrition-locality property does not hold under it.
    """
    if rule not in ("some-pair", "every-pair"):
        raise ValueError(f"unknown neighbour rule {rule!r}")
    owner = assign.owner
    if owner.size != sp.n:
        raise ValidationError("assignment and graph sizes differ")
    member = closed_cells(fleet, travel_costs(sp, fleet))
    m = assign.m
    rel = np.zeros((m, m), dtype=bool)
    cells = [np.flatnonzero(owner == a) for a in range(m)]
    for a in range(m):
        for b in range(a + 1, m):
            if cells[a].size == 0 or cells[b].size == 0:
                continue
            outside = ~(member[a] | member[b])
            block = sp.on_path[np.ix_(cells[a], cells[b])]
            ok = ~(block & outside).any(axis=2)
            rel[a, b] = rel[b, a] = ok.any() if rule == "some-pair" else ok.all()
    return rel


def neighbor_set(rel: np.ndarray, agent: int) -> set[int]:
    return set(np.flatnonzero(rel[agent]).tolist())


# --------------------------------------------------------------------------
# 1-d multiplicatively weighted Voronoi
# --------------------------------------------------------------------------

def _exact(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(float(x))


def line_times(x, agents, dead=()) -> dict[int, Fraction]:
    """Travel time from each alive agent to point ``x`` on the real line."""
    x = _exact(x)
    return {k: abs(x - _exact(p)) / _exact(s)
            for k, (p, s) in enumerate(agents) if k not in dead}


def line_owner(x, agents, dead=()) -> int:
    """Fastest alive agent at ``x``; ties go to the lowest agent index."""
    times = line_times(x, agents, dead)
    if not times:
        raise ValidationError("no alive agents")
    best = min(times.values())
    return min(k for k, t in times.items() if t == best)


def mw_voronoi_line(agents, dead=()) -> list[tuple[Fraction | float, Fraction | float, int]]:
    """Exact owner intervals on the real line under the time metric ``|x - p| / s``.

    ``agents`` is a sequence of ``(position, speed)``.  Returns maximal
    intervals ``(lo, hi, owner)`` read as ``(lo, hi]``; the first interval is
    closed on the right at its finite end and the outer ends are
    ``-inf``/``inf``.  Boundaries are Fractions, so they are exact for any
    rational input.  A boundary point goes to the owner on its left.
    """
    agents = [(_exact(p), _exact(s)) for p, s in agents]
    if not agents:
        raise ValidationError("need at least one agent")
    for _, s in agents:
        if s <= 0:
            raise ValidationError("speeds must be positive")
    live = [k for k in range(len(agents)) if k not in dead]
    if not live:
        raise ValidationError("no alive agents")
    pos = [agents[k][0] for k in live]
    if len(set(pos)) != len(pos):
        raise ValidationError("agent positions must be distinct")

    cuts = set()
    for x, a in enumerate(live):
        pa, sa = agents[a]
        for b in live[x + 1:]:
            pb, sb = agents[b]
            # |x-pa|/sa = |x-pb|/sb: one root between the agents, one outside if speeds differ
            cuts.add((sb * pa + sa * pb) / (sa + sb))
            if sa != sb:
                cuts.add((sb * pa - sa * pb) / (sb - sa))
    cuts = sorted(cuts)

    def owner_at(x):
        return line_owner(x, agents, dead)

    if not cuts:
        return [(-math.inf, math.inf, live[0])]
    probes = [cuts[0] - 1] + [(lo + hi) / 2 for lo, hi in zip(cuts, cuts[1:])] + [cuts[-1] + 1]
    owners = [owner_at(x) for x in probes]
    bounds = [-math.inf] + cuts + [math.inf]
    out = []
    for k, who in enumerate(owners):
        lo, hi = bounds[k], bounds[k + 1]
        if out and out[-1][2] == who:
            out[-1] = (out[-1][0], hi, who)
        else:
            out.append((lo, hi, who))
    return out


# --------------------------------------------------------------------------
# serialisation
# --------------------------------------------------------------------------

def assignment_to_csv(assign: Assignment) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node", "agent"])
    for i, a in enumerate(assign.owner.tolist()):
        w.writerow([i, a])
    return buf.getvalue()


def assignment_from_csv(text: str, m: int | None = None, tie_seed: int = 0) -> Assignment:
    rows = list(csv.DictReader(io.StringIO(text)))
    nodes = [int(r["node"]) for r in rows]
    if sorted(nodes) != list(range(len(nodes))):
        raise ValidationError("assignment CSV must list nodes 0..n-1 exactly once")
    owner = [0] * len(nodes)
    for i, r in zip(nodes, rows):
        owner[i] = int(r["agent"])
    if m is None:
        m = max(owner) + 1
    return Assignment(owner, m, tie_seed)


def neighbors_to_csv(rel: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["agent_a", "agent_b"])
    for a, b in zip(*np.nonzero(np.triu(rel, 1))):
        w.writerow([int(a), int(b)])
    return buf.getvalue()


def _fmt_bound(x) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return repr(float(x))


def intervals_to_csv(intervals) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lo", "hi", "agent"])
    for lo, hi, who in intervals:
        w.writerow([_fmt_bound(lo), _fmt_bound(hi), who])
    return buf.getvalue()


def intervals_from_csv(text: str) -> list[tuple[float, float, int]]:
    return [(float(r["lo"]), float(r["hi"]), int(r["agent"]))
            for r in csv.DictReader(io.StringIO(text))]
