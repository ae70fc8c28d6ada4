"""Hot numeric kernels.

Each kernel has a loop-style implementation compiled with numba and a numpy
implementation used when numba is absent or disabled.  The public names at
the bottom of the module point at whichever path is active; both paths stay
importable so they can be cross-checked.
"""
import numpy as np

from ._accel import njit, select

EPS = 1e-9


# --------------------------------------------------------------------------
# all-pairs shortest paths
# --------------------------------------------------------------------------

@njit
def floyd_warshall_nb(w):
    n = w.shape[0]
    d = w.copy()
    for k in range(n):
        for i in range(n):
            dik = d[i, k]
            if dik == np.inf:
                continue
            for j in range(n):
                alt = dik + d[k, j]
                if alt < d[i, j]:
                    d[i, j] = alt
    return d


def floyd_warshall_np(w):
    d = np.array(w, dtype=np.float64, copy=True)
    for k in range(d.shape[0]):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


# --------------------------------------------------------------------------
# Held-Karp subset DP.  Index 0 of ``c`` is the start; returns the cost of
# the best closed tour and the visiting order of indices 1..k.
# --------------------------------------------------------------------------

@njit
def held_karp_nb(c):
    k = c.shape[0] - 1
    if k == 0:
        return 0.0, np.zeros(0, dtype=np.int64)
    full = (1 << k) - 1
    dp = np.full((1 << k, k), np.inf)
    parent = np.full((1 << k, k), -1, dtype=np.int64)
    for mask in range(1, full + 1):
        for j in range(k):
            if not (mask >> j) & 1:
                continue
            prev = mask ^ (1 << j)
            if prev == 0:
                dp[mask, j] = c[0, j + 1]
                continue
            best = np.inf
            arg = -1
            for i in range(k):
                if (prev >> i) & 1:
                    val = dp[prev, i] + c[i + 1, j + 1]
                    if val < best:
                        best = val
                        arg = i
            dp[mask, j] = best
            parent[mask, j] = arg
    best = np.inf
    last = -1
    for j in range(k):
        val = dp[full, j] + c[j + 1, 0]
        if val < best:
            best = val
            last = j
    order = np.empty(k, dtype=np.int64)
    mask = full
    for pos in range(k - 1, -1, -1):
        order[pos] = last + 1
        nxt = parent[mask, last]
        mask ^= 1 << last
        last = nxt
    return best, order


def held_karp_np(c):
    c = np.asarray(c, dtype=np.float64)
    k = c.shape[0] - 1
    if k == 0:
        return 0.0, np.zeros(0, dtype=np.int64)
    full = (1 << k) - 1
    sub = c[1:, 1:]
    ar = np.arange(k)
    dp = np.full((1 << k, k), np.inf)
    parent = np.full((1 << k, k), -1, dtype=np.int64)
    for j in range(k):
        dp[1 << j, j] = c[0, j + 1]
    for mask in range(1, full + 1):
        bits = ar[(mask >> ar) & 1 == 1]
        if bits.size == 1:
            continue
        prevs = mask ^ (1 << bits)
        cand = dp[prevs] + sub[:, bits].T
        arg = np.argmin(cand, axis=1)
        dp[mask, bits] = cand[np.arange(bits.size), arg]
        parent[mask, bits] = arg
    tail = dp[full] + c[1:, 0]
    last = int(np.argmin(tail))
    best = float(tail[last])
    order = np.empty(k, dtype=np.int64)
    mask = full
    for pos in range(k - 1, -1, -1):
        order[pos] = last + 1
        nxt = parent[mask, last]
        mask ^= 1 << last
        last = nxt
    return best, order


# --------------------------------------------------------------------------
# fixed-tick patrol advance
#
# Agent state: ``route[a, :route_len[a]]`` is a closed tour; ``pos[a]`` is
# the index of the stop last departed and ``progress[a]`` the time spent on
# the leg toward the following stop.  A pending route replaces the current
# one on the next arrival; its first stop must be that arrival node.
# --------------------------------------------------------------------------

def _step_agent(a, t, dt, dist, speed, route, route_len, pend_route, pend_len,
                pending, pos, progress, last_visit, last_interval, visit_count):
    length = route_len[a]
    if length == 1:
        v = route[a, 0]
        last_interval[v] = t - last_visit[v]
        last_visit[v] = t
        visit_count[v] += 1
        progress[a] = 0.0
        return
    progress[a] += dt
    while True:
        length = route_len[a]
        u = route[a, pos[a]]
        nxt = pos[a] + 1
        if nxt == length:
            nxt = 0
        v = route[a, nxt]
        leg = dist[u, v] / speed[a]
        if progress[a] + 1e-9 < leg:
            break
        progress[a] -= leg
        if progress[a] < 0.0:
            progress[a] = 0.0
        pos[a] = nxt
        last_interval[v] = t - last_visit[v]
        last_visit[v] = t
        visit_count[v] += 1
        if pending[a]:
            pending[a] = False
            route_len[a] = pend_len[a]
            for s in range(pend_len[a]):
                route[a, s] = pend_route[a, s]
            pos[a] = 0
            if route_len[a] == 1:
                progress[a] = 0.0
                break


_step_agent_nb = njit(_step_agent)


@njit
def advance_nb(k0, k1, tick, dist, speed, alive, route, route_len, pend_route,
               pend_len, pending, pos, progress, last_visit, last_interval,
               visit_count, avg_out, std_out, trace):
    n = last_visit.shape[0]
    m = alive.shape[0]
    record_trace = trace.shape[0] > 0
    for k in range(k0 + 1, k1 + 1):
        t = k * tick
        for a in range(m):
            if alive[a]:
                _step_agent_nb(a, t, tick, dist, speed, route, route_len, pend_route,
                               pend_len, pending, pos, progress, last_visit,
                               last_interval, visit_count)
        total = 0.0
        for i in range(n):
            total += t - last_visit[i]
        mean = total / n
        sq = 0.0
        for i in range(n):
            dev = t - last_visit[i] - mean
            sq += dev * dev
        avg_out[k - 1] = mean
        std_out[k - 1] = np.sqrt(sq / n)
        if record_trace:
            for i in range(n):
                trace[k - 1, i] = t - last_visit[i]


def advance_np(k0, k1, tick, dist, speed, alive, route, route_len, pend_route,
               pend_len, pending, pos, progress, last_visit, last_interval,
               visit_count, avg_out, std_out, trace):
    record_trace = trace.shape[0] > 0
    live = np.flatnonzero(alive)
    for k in range(k0 + 1, k1 + 1):
        t = k * tick
        for a in live:
            _step_agent(a, t, tick, dist, speed, route, route_len, pend_route,
                        pend_len, pending, pos, progress, last_visit,
                        last_interval, visit_count)
        idle = t - last_visit
        avg_out[k - 1] = idle.mean()
        std_out[k - 1] = idle.std()
        if record_trace:
            trace[k - 1] = idle


floyd_warshall = select(floyd_warshall_nb, floyd_warshall_np)
held_karp = select(held_karp_nb, held_karp_np)
advance = select(advance_nb, advance_np)
