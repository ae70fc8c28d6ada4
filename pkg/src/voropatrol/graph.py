"""Patrol graphs, shortest paths and per-agent travel-time matrices."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import GraphFormatError, ValidationError

TOL = 1e-9


@dataclass(frozen=True)
class PatrolGraph:
    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("graph needs at least one node")
        seen = set()
        for i, j, length in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValidationError(f"edge ({i}, {j}) references unknown node")
            if i == j:
                raise ValidationError(f"self-loop at node {i}")
            if not length > 0 or not np.isfinite(length):
                raise ValidationError(f"nonpositive edge length on ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValidationError(f"duplicate edge ({i}, {j})")
            seen.add(key)
        if not _connected(self.n, self.edges):
            raise ValidationError("graph not connected")

    @property
    def nodes(self) -> range:
        return range(self.n)

    def weights(self) -> np.ndarray:
        """Dense weight matrix; ``inf`` where there is no edge."""
        w = np.full((self.n, self.n), np.inf)
        np.fill_diagonal(w, 0.0)
        for i, j, length in self.edges:
            w[i, j] = w[j, i] = length
        return w

    def adjacency(self) -> list[list[tuple[int, float]]]:
        adj = [[] for _ in range(self.n)]
        for i, j, length in self.edges:
            adj[i].append((j, length))
            adj[j].append((i, length))
        for row in adj:
            row.sort()
        return adj


def _connected(n, edges):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j, _ in edges:
        parent[find(i)] = find(j)
    return len({find(x) for x in range(n)}) == 1


def parse_graph(text: str) -> PatrolGraph:
    """Parse the line-oriented graph format.

    ``n <count>`` must come first; each ``e <i> <j> <length>`` adds an
    undirected edge.  Blank lines and lines starting with ``#`` are ignored.
    """
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "n":
            if n is not None:
                raise GraphFormatError("node count given twice", lineno)
            if len(parts) != 2:
                raise GraphFormatError("expected 'n <node-count>'", lineno)
            try:
                n = int(parts[1])
            except ValueError:
                raise GraphFormatError(f"bad node count {parts[1]!r}", lineno) from None
            if n < 1:
                raise GraphFormatError("node count must be positive", lineno)
        elif tag == "e":
            if n is None:
                raise GraphFormatError("edge before node count", lineno)
            if len(parts) != 4:
                raise GraphFormatError("expected 'e <i> <j> <length>'", lineno)
            try:
                i, j, length = int(parts[1]), int(parts[2]), float(parts[3])
            except ValueError:
                raise GraphFormatError(f"cannot parse edge {line!r}", lineno) from None
            if not (0 <= i < n and 0 <= j < n):
                raise GraphFormatError(f"node id out of range in {line!r}", lineno)
            if i == j:
                raise GraphFormatError(f"self-loop at node {i}", lineno)
            if not length > 0 or not np.isfinite(length):
                raise GraphFormatError("nonpositive edge length", lineno)
            edges.append((i, j, length))
        else:
            raise GraphFormatError(f"unknown record {tag!r}", lineno)
    if n is None:
        raise GraphFormatError("missing node count")
    seen = set()
    for i, j, _ in edges:
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ValidationError(f"duplicate edge ({i}, {j})")
        seen.add(key)
    return PatrolGraph(n, tuple(edges))


def format_graph(g: PatrolGraph) -> str:
    lines = [f"n {g.n}"]
    lines += [f"e {i} {j} {length!r}" for i, j, length in g.edges]
    return "\n".join(lines) + "\n"


def load_graph(path) -> PatrolGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


@dataclass(frozen=True, eq=False)
class ShortestPaths:
    """All-pairs shortest-path lengths plus path retrieval."""

    graph: PatrolGraph
    dist: np.ndarray
    _adj: list = field(repr=False, default=None)

    def __post_init__(self):
        self.dist.setflags(write=False)
        object.__setattr__(self, "_adj", self.graph.adjacency())

    @property
    def n(self) -> int:
        return self.graph.n

    def path(self, i: int, j: int) -> list[int]:
        """Lexicographically smallest shortest path from ``i`` to ``j``."""
        d = self.dist
        out = [i]
        u = i
        while u != j:
            for v, length in self._adj[u]:
                if abs(length + d[v, j] - d[u, j]) <= TOL:
                    u = v
                    break
            else:  # pragma: no cover - unreachable on a consistent matrix
                raise RuntimeError("shortest-path matrix inconsistent with graph")
            out.append(u)
        return out

    @cached_property
    def on_path(self) -> np.ndarray:
        """``on_path[i, j, t]`` is True iff ``t`` lies on some shortest i-j path."""
        d = self.dist
        return np.abs(d[:, None, :] + d.T[None, :, :] - d[:, :, None]) <= TOL

    def nodes_between(self, i: int, j: int) -> np.ndarray:
        return np.flatnonzero(self.on_path[i, j])


def all_pairs_shortest_paths(g: PatrolGraph) -> ShortestPaths:
    return ShortestPaths(g, kernels.floyd_warshall(g.weights()))


def travel_costs(dist, speeds) -> np.ndarray:
    """Per-agent travel-time matrices, shape ``(m, n, n)``.

    ``dist`` may be a :class:`ShortestPaths` or a plain matrix; ``speeds`` a
    sequence of speeds or anything with a ``speeds`` attribute (a fleet).
    """
    if isinstance(dist, ShortestPaths):
        dist = dist.dist
    speeds = np.asarray(getattr(speeds, "speeds", speeds), dtype=np.float64)
    if np.any(~(speeds > 0)):
        raise ValidationError("agent speeds must be positive")
    return np.asarray(dist)[None, :, :] / speeds[:, None, None]


def random_graph(n: int, rng: np.random.Generator, extra_edges: int | None = None,
                 low: float = 1.0, high: float = 10.0) -> PatrolGraph:
    """Random connected graph: random spanning tree plus extra edges.

    Lengths are uniform in ``[low, high]``.  ``extra_edges`` defaults to
    about ``n // 2``.
    """
    order = rng.permutation(n)
    edges = {}
    for k in range(1, n):
        u = int(order[k])
        v = int(order[rng.integers(0, k)])
        edges[(min(u, v), max(u, v))] = float(rng.uniform(low, high))
    if extra_edges is None:
        extra_edges = n // 2
    missing = n * (n - 1) // 2 - len(edges)
    extra_edges = min(extra_edges, missing)
    while extra_edges > 0:
        u, v = (int(x) for x in rng.choice(n, size=2, replace=False))
        key = (min(u, v), max(u, v))
        if key in edges:
            continue
        edges[key] = float(rng.uniform(low, high))
        extra_edges -= 1
    return PatrolGraph(n, tuple((i, j, w) for (i, j), w in sorted(edges.items())))
