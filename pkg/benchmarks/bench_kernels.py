"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--n 200]

Each row reports the best wall time of ``--repeat`` calls per path after one
warm-up call (which absorbs JIT compilation), and checks both paths agree.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from voropatrol import kernels, sim
from voropatrol._accel import numba
from voropatrol.allocation import Fleet
from voropatrol.graph import all_pairs_shortest_paths, random_graph


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_floyd_warshall(n, repeat):
    g = random_graph(n, np.random.default_rng(0))
    w = g.weights()
    t_nb, a = best_of(lambda: kernels.floyd_warshall_nb(w.copy()), repeat)
    t_np, b = best_of(lambda: kernels.floyd_warshall_np(w.copy()), repeat)
    return f"floyd_warshall n={n}", t_nb, t_np, np.allclose(a, b)


def bench_held_karp(k, repeat):
    rng = np.random.default_rng(1)
    pts = rng.random((k + 1, 2))
    c = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    t_nb, a = best_of(lambda: kernels.held_karp_nb(c), repeat)
    t_np, b = best_of(lambda: kernels.held_karp_np(c), repeat)
    same = abs(a[0] - b[0]) <= 1e-9 and list(a[1]) == list(b[1])
    return f"held_karp k={k}", t_nb, t_np, same


def bench_simulation(n, repeat):
    rng = np.random.default_rng(2)
    g = random_graph(n, rng)
    fleet = Fleet.from_origins(rng.choice(n, 6, replace=False).tolist())
    sc = sim.Scenario(g, fleet, horizon=2000.0, events=(sim.AttritionEvent(700.0, None),))
    sp = all_pairs_shortest_paths(g)
    results = {}
    saved = kernels.advance
    try:
        for name, fn in (("nb", kernels.advance_nb), ("np", kernels.advance_np)):
            kernels.advance = fn
            results[name] = best_of(lambda: sim.run(sc, sp=sp), repeat)
    finally:
        kernels.advance = saved
    a, b = results["nb"][1], results["np"][1]
    # visits must match exactly; the per-tick mean differs only by summation order
    same = np.array_equal(a.visit_count, b.visit_count) and np.allclose(a.avg_idleness, b.avg_idleness,
                                                                        rtol=0, atol=1e-9)
    return f"simulate n={n} ticks={sc.n_ticks}", results["nb"][0], results["np"][0], same


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--n", type=int, default=200, help="graph size for shortest paths")
    p.add_argument("--tour", type=int, default=12, help="stops for the exact tour")
    p.add_argument("--sim-n", type=int, default=60)
    args = p.parse_args(argv)
    if numba is None:
        print("numba is not installed; both columns time the same numpy code")
    rows = [bench_floyd_warshall(args.n, args.repeat),
            bench_held_karp(args.tour, args.repeat),
            bench_simulation(args.sim_n, max(1, args.repeat // 2))]
    print(f"{'kernel':32s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}  agree")
    for name, t_nb, t_np, same in rows:
        print(f"{name:32s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}x  {same}")


if __name__ == "__main__":
    main()
