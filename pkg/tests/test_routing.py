import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import make_instance, path_graph
from oracles import brute_tour
from voropatrol.errors import CapExceededError
from voropatrol.graph import all_pairs_shortest_paths
from voropatrol.routing import (EXACT_CAP, Route, check_route, cycle_time, exact_tour, nn_tour,
                                route_from_order, routes_from_csv, routes_to_csv)


@pytest.fixture
def path3():
    return all_pairs_shortest_paths(path_graph([1, 1])).dist


def test_origin_only_tour_is_free(path3):
    r = nn_tour([0], 0, path3)
    assert r.order == (0,) and r.cycle_time == 0.0 and r.visit_times == (0.0,)


def test_empty_assignment_idles_at_origin(path3):
    r = nn_tour([], 2, path3, agent=4)
    assert r == Route(4, (2,), (0.0,), 0.0)
    assert exact_tour([], 2, path3, agent=4) == r


def test_path_graph_tour(path3):
    r = nn_tour([1, 2], 0, path3)
    assert r.order == (0, 1, 2)
    assert r.visit_times == (0.0, 1.0, 2.0)
    assert r.cycle_time == 4.0
    assert exact_tour([1, 2], 0, path3).cycle_time == 4.0
    assert cycle_time(r, path3) == 4.0


def test_nn_ties_go_to_lowest_id():
    # star: centre 0, leaves at distance 1
    from voropatrol.graph import PatrolGraph
    d = all_pairs_shortest_paths(PatrolGraph(4, ((0, 3, 1.0), (0, 1, 1.0), (0, 2, 1.0)))).dist
    assert nn_tour([1, 2, 3], 0, d).order == (0, 1, 2, 3)


def test_single_stop_matches_nn(path3):
    assert exact_tour([2], 0, path3) == nn_tour([2], 0, path3)


def test_exact_tour_cap():
    d = np.ones((20, 20)) - np.eye(20)
    exact_tour(range(EXACT_CAP), 0, d)
    with pytest.raises(CapExceededError):
        exact_tour(range(EXACT_CAP + 1), 0, d)


@pytest.mark.parametrize("seed", range(10))
def test_exact_matches_factorial_enumeration(seed):
    _, _, sp, _ = make_instance(seed, 12, 1)
    r = np.random.default_rng(seed)
    nodes = r.choice(12, size=6, replace=False).tolist()
    origin, stops = nodes[0], nodes[1:]
    got = exact_tour(stops, origin, sp.dist)
    assert abs(got.cycle_time - brute_tour(stops, origin, sp.dist.tolist())) <= 1e-9
    assert got.cycle_time <= nn_tour(stops, origin, sp.dist).cycle_time


def test_exact_never_worse_and_sometimes_equal():
    equal = 0
    for seed in range(100):
        _, _, sp, _ = make_instance(seed, 10, 1)
        r = np.random.default_rng(1000 + seed)
        stops = r.choice(10, size=int(r.integers(2, 8)), replace=False).tolist()
        ex = exact_tour(stops, stops[0], sp.dist).cycle_time
        nn = nn_tour(stops, stops[0], sp.dist).cycle_time
        assert ex <= nn
        equal += ex == nn
    assert 0 < equal < 100


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), k=st.integers(0, 9), exact=st.booleans())
def test_route_invariants(seed, k, exact):
    _, _, sp, _ = make_instance(seed, 12, 1)
    r = np.random.default_rng(seed)
    nodes = r.choice(12, size=k + 1, replace=False).tolist()
    build = exact_tour if exact else nn_tour
    route = build(nodes[1:], nodes[0], sp.dist)
    check_route(route, nodes, nodes[0])
    assert cycle_time(route, sp.dist) == route.cycle_time
    if k:
        assert route.cycle_time == pytest.approx(route.visit_times[-1] + sp.dist[route.order[-1], route.order[0]])


def test_reverse_tour_has_identical_cycle_time():
    _, _, sp, _ = make_instance(4, 12, 1)
    order = [3, 7, 1, 9, 0, 5]
    fwd = route_from_order(order, sp.dist)
    rev = route_from_order([order[0]] + order[:0:-1], sp.dist)
    assert fwd.cycle_time == rev.cycle_time


def test_route_csv_round_trip():
    _, fleet, sp, costs = make_instance(6, 12, 2, speeds=[1.0, 2.0])
    routes = [nn_tour([1, 2, 5, 8], 1, costs[0], 0), exact_tour([3, 4, 11], 3, costs[1], 1)]
    text = routes_to_csv(routes)
    assert text.splitlines()[0] == "agent,seq,node,visit_time"
    assert routes_from_csv(text, costs) == routes
