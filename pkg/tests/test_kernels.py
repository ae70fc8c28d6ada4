import os
import subprocess
import sys

import numpy as np
import pytest

from helpers import make_instance
from voropatrol import kernels
from voropatrol.allocation import Fleet
from voropatrol.graph import random_graph
from voropatrol.sim import AttritionEvent, Scenario, run


@pytest.mark.parametrize("seed", range(4))
def test_floyd_warshall_paths_agree(seed):
    w = random_graph(25, np.random.default_rng(seed)).weights()
    np.testing.assert_array_equal(kernels.floyd_warshall_nb(w), kernels.floyd_warshall_np(w))


@pytest.mark.parametrize("k", [0, 1, 2, 5, 9])
def test_held_karp_paths_agree(k):
    _, _, sp, _ = make_instance(k, 12, 1)
    c = np.ascontiguousarray(sp.dist[: k + 1, : k + 1])
    cost_nb, order_nb = kernels.held_karp_nb(c)
    cost_np, order_np = kernels.held_karp_np(c)
    assert cost_nb == cost_np
    np.testing.assert_array_equal(order_nb, order_np)
    assert sorted(order_nb.tolist()) == list(range(1, k + 1))


def test_advance_paths_agree(monkeypatch):
    g, fleet, _, _ = make_instance(3, 15, 3, speeds=[1.0, 1.5, 0.8])
    sc = Scenario(g, fleet, horizon=120.0, events=(AttritionEvent(30.0, 1),))
    fast = run(sc, record_trace=True)
    monkeypatch.setattr(kernels, "advance", kernels.advance_np)
    slow = run(sc, record_trace=True)
    np.testing.assert_allclose(fast.avg_idleness, slow.avg_idleness, rtol=0, atol=1e-9)
    np.testing.assert_allclose(fast.std_idleness, slow.std_idleness, rtol=0, atol=1e-9)
    np.testing.assert_array_equal(fast.trace, slow.trace)
    np.testing.assert_array_equal(fast.visit_count, slow.visit_count)


def test_env_flag_selects_numpy_path():
    code = "import voropatrol, voropatrol.kernels as k; print(voropatrol.USING_NUMBA, k.held_karp is k.held_karp_np)"
    env = dict(os.environ, VOROPATROL_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]
