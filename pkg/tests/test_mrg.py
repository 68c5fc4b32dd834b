import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from greenroute import (
    Flow,
    ResidualState,
    Workload,
    assign_node_weights,
    build_star_reduction,
    inv_count,
    is_capable,
    is_connected,
    node_to_link_weights,
    online_arrival,
    online_departure,
    route_mrg,
    shortest_path,
)
from greenroute.topology import Node, NodeKind, Topology
from greenroute.workload import generate_workload

from oracle_helpers import (
    all_simple_paths,
    best_path_by_enumeration,
    brute_inversions,
    path_link_cost,
    random_topology,
)

TOL = 1e-9


# -- is_capable ---------------------------------------------------------------

def test_is_capable_fresh_node():
    assert is_capable((1, 1, 1), (0.1, 0.3, 0.4))


def test_is_capable_one_dimension_short():
    assert not is_capable((0.4, 0.6, 0.9), (0.5, 0.1, 0.1))


def test_is_capable_boundary_admitted():
    assert is_capable((0.3, 0.2), (0.3, 0.2))


def test_is_capable_length_mismatch():
    with pytest.raises(ValueError):
        is_capable((1.0,), (0.1, 0.2))


# -- inv_count ----------------------------------------------------------------

def test_inv_count_aligned_profiles():
    assert inv_count((0.4, 0.6, 0.9), (0.1, 0.3, 0.4)) == 0


def test_inv_count_constant_vector():
    assert inv_count((0.9, 0.1, 0.5), (0.3, 0.3, 0.3)) == 0


def test_inv_count_reversed_orders_hit_maximum():
    assert inv_count((0.9, 0.6, 0.3), (0.1, 0.2, 0.3)) == 3


def test_inv_count_length_mismatch():
    with pytest.raises(ValueError):
        inv_count((1, 2), (1, 2, 3))


@given(st.integers(1, 6).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0, 1, allow_nan=False), min_size=n, max_size=n),
        st.lists(st.floats(0, 1, allow_nan=False), min_size=n, max_size=n),
    )))
def test_inv_count_matches_brute_force_and_bound(pair):
    x, y = pair
    n = len(x)
    count = inv_count(x, y)
    assert count == brute_inversions(x, y)
    assert count == inv_count(y, x)
    assert 0 <= count <= n * (n - 1) // 2
    assert inv_count(x, x) == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_inv_count_exhaustive_permutations(n):
    most = n * (n - 1) // 2
    for x in itertools.permutations(range(1, n + 1)):
        for y in itertools.permutations(range(1, n + 1)):
            c = inv_count(x, y)
            assert 0 <= c <= most
            assert c == brute_inversions(x, y)
    increasing = tuple(range(1, n + 1))
    assert inv_count(increasing, increasing[::-1]) == most


# -- weight assignment ----------------------------------------------------------

def _state_with(topology, dims, loads):
    state = ResidualState.fresh(topology, dims)
    for v, load in loads.items():
        state.residual[v] = [1.0 - c for c in load]
        state.active.add(v)
    return state


def test_assign_weights_inactive_formula(tree4):
    state = ResidualState.fresh(tree4, 3)
    weights = assign_node_weights(state, (0.1, 0.2, 0.3), tree4)
    for v in tree4.processor_ids:
        assert weights[v] == 4  # 3*2/2 + 1
    for h in tree4.host_ids:
        assert weights[h] == 0


def test_assign_weights_one_dimension(tree4):
    state = _state_with(tree4, 1, {16: (0.3,)})
    weights = assign_node_weights(state, (0.2,), tree4)
    assert weights[16] == 0
    assert weights[17] == 1


def test_assign_weights_active_inversion(tree4):
    state = _state_with(tree4, 2, {16: (0.1, 0.8)})  # residual (0.9, 0.2)
    weights = assign_node_weights(state, (0.1, 0.2), tree4)
    assert weights[16] == 1


def test_weight_separation_property(tree4):
    rng = random.Random(3)
    for _ in range(50):
        dims = rng.randint(1, 5)
        loads = {v: tuple(rng.uniform(0, 0.9) for _ in range(dims))
                 for v in rng.sample(tree4.processor_ids, 6)}
        state = _state_with(tree4, dims, loads)
        demand = tuple(rng.uniform(0, 0.3) for _ in range(dims))
        weights = assign_node_weights(state, demand, tree4)
        top_active = max(weights[v] for v in state.active)
        for v in tree4.processor_ids:
            if v not in state.active:
                assert weights[v] > top_active


# -- node-to-link transform ---------------------------------------------------------

def test_link_weight_is_half_sum(tree2):
    weights = {v: 0 for v in range(len(tree2))}
    u, v = tree2.edges[0]
    weights[u], weights[v] = 2, 3
    assert node_to_link_weights(tree2, weights)[(u, v)] == 2.5


def test_zero_node_weights_give_zero_links(tree2):
    weights = {v: 0 for v in range(len(tree2))}
    links = node_to_link_weights(tree2, weights)
    assert set(links.values()) == {0.0}


def test_transform_telescopes_on_every_path():
    # integer node weights make the identity exact in floating point
    rng = random.Random(17)
    for _ in range(40):
        topo = random_topology(rng, rng.randint(4, 9), 0.5)
        weights = {v: rng.randint(0, 7) for v in range(len(topo))}
        links = node_to_link_weights(topo, weights)
        s, t = rng.sample(range(len(topo)), 2)
        for path in all_simple_paths(topo, s, t):
            node_total = sum(weights[v] for v in path)
            assert path_link_cost(path, links) == node_total - (weights[s] + weights[t]) / 2


# -- connectivity ----------------------------------------------------------------

def test_is_connected_full_graph(tree4):
    everything = set(range(len(tree4)))
    assert is_connected(tree4, everything, 0, 15)


def test_is_connected_empty_allowed(tree4):
    assert not is_connected(tree4, set(), 0, 1)  # hosts are never adjacent
    assert is_connected(tree4, set(), 0, 0)


def test_is_connected_star_fixture():
    star = build_star_reduction(3)
    assert is_connected(star.topology, {star.middle_ids[1]}, star.src, star.dst)
    assert not is_connected(star.topology, set(), star.src, star.dst)


# -- shortest path ----------------------------------------------------------------

def _parallel_two_hop(weights_mid):
    n = 2 + len(weights_mid)
    nodes = [Node(0, NodeKind.HOST, None, 0), Node(1, NodeKind.HOST, None, 1)]
    nodes += [Node(2 + i, NodeKind.EDGE, None, i) for i in range(len(weights_mid))]
    edges = [(0, 2 + i) for i in range(len(weights_mid))] + [(2 + i, 1) for i in range(len(weights_mid))]
    topo = Topology(nodes, edges)
    node_w = {0: 0, 1: 0}
    node_w.update({2 + i: w for i, w in enumerate(weights_mid)})
    return topo, node_to_link_weights(topo, node_w)


def test_shortest_path_prefers_light_middle():
    topo, links = _parallel_two_hop([4, 1])
    assert shortest_path(topo, {2, 3}, links, 0, 1) == [0, 3, 1]


def test_shortest_path_tie_breaks_to_lowest_ids():
    topo, links = _parallel_two_hop([2, 2, 2])
    assert shortest_path(topo, {2, 3, 4}, links, 0, 1) == [0, 2, 1]


def test_shortest_path_rejects_negative_weights():
    topo, links = _parallel_two_hop([1, 1])
    links[(0, 2)] = -0.5
    with pytest.raises(ValueError):
        shortest_path(topo, {2, 3}, links, 0, 1)


def test_shortest_path_disconnected_returns_none():
    topo, links = _parallel_two_hop([1, 1])
    assert shortest_path(topo, set(), links, 0, 1) is None


def test_shortest_path_matches_enumeration_oracle():
    rng = random.Random(99)
    hits = 0
    for _ in range(60):
        topo = random_topology(rng, rng.randint(5, 12), 0.35)
        node_w = {v: rng.randint(0, 6) for v in range(len(topo))}
        links = node_to_link_weights(topo, node_w)
        s, t = rng.sample(range(len(topo)), 2)
        best_cost, best_path = best_path_by_enumeration(topo, links, s, t)
        got = shortest_path(topo, set(range(len(topo))), links, s, t)
        if best_cost is None:
            assert got is None
            continue
        hits += 1
        assert got == best_path
        assert path_link_cost(got, links) == best_cost
    assert hits > 20


# -- route_mrg -----------------------------------------------------------------------

def test_single_flow_takes_lexicographic_shortest_path(tree4):
    # intra-pod, different racks: host 0 (edge 16) to host 2 (edge 17)
    w = Workload((Flow(0, 0, 2, (0.2, 0.2)),), 2, z=4)
    sol = route_mrg(tree4, w, seed=0)
    assert sol.paths[0] == (0, 16, 24, 17, 2)
    assert sol.active == {16, 24, 17}

    # inter-pod: host 0 to host 4 crosses the lowest core
    w = Workload((Flow(0, 0, 4, (0.2, 0.2)),), 2, z=4)
    sol = route_mrg(tree4, w, seed=0)
    assert sol.paths[0] == (0, 16, 24, 32, 26, 18, 4)
    assert sol.active == {16, 24, 32, 26, 18}


def test_two_intra_rack_flows_share_the_edge_switch(tree4):
    flows = (Flow(0, 0, 1, (0.4,)), Flow(1, 0, 1, (0.4,)))
    sol = route_mrg(tree4, Workload(flows, 1, z=4), seed=5)
    assert sol.paths[0] == (0, 16, 1)
    assert sol.paths[1] == (0, 16, 1)
    assert sol.active == {16}
    assert sol.load[16] == pytest.approx((0.8,), abs=TOL)


def test_committing_flow_updates_loads_like_worked_example():
    # two loaded processors in series; committing (0.1, 0.3, 0.4) lands on both
    nodes = [Node(0, NodeKind.HOST, None, 0), Node(1, NodeKind.HOST, None, 1),
             Node(2, NodeKind.EDGE, None, 0), Node(3, NodeKind.EDGE, None, 1)]
    topo = Topology(nodes, [(0, 2), (2, 3), (3, 1)])
    state = _state_with(topo, 3, {2: (0.6, 0.4, 0.1), 3: (0.4, 0.4, 0.3)})
    path = online_arrival(state, topo, Flow(0, 0, 1, (0.1, 0.3, 0.4)))
    assert path == (0, 2, 3, 1)
    assert state.load_of(2) == pytest.approx((0.7, 0.7, 0.5), abs=TOL)
    assert state.load_of(3) == pytest.approx((0.5, 0.7, 0.7), abs=TOL)


def test_route_mrg_feasible_and_partitioned(tree4):
    for seed in range(20):
        w = generate_workload(tree4, 25, 3, 0.1, 0.1, seed=seed)
        sol = route_mrg(tree4, w, seed=seed)
        assert set(sol.paths) | set(sol.unrouted) == set(range(25))
        assert not set(sol.paths) & set(sol.unrouted)
        for v in tree4.processor_ids:
            assert all(c <= 1 + TOL for c in sol.load[v])
        # loads recompute exactly from committed paths
        expect = {v: [0.0] * 3 for v in tree4.processor_ids}
        for fid, path in sol.paths.items():
            for v in path:
                if tree4.is_processor(v):
                    for k in range(3):
                        expect[v][k] += w.flows[fid].demand[k]
        for v in tree4.processor_ids:
            assert sol.load[v] == pytest.approx(tuple(expect[v]), abs=TOL)
        assert sol.active == {v for v in tree4.processor_ids if any(expect[v])}


def test_route_mrg_path_invariants(tree4):
    w = generate_workload(tree4, 30, 2, 0.05, 0.05, seed=3)
    sol = route_mrg(tree4, w, seed=3)
    for fid, path in sol.paths.items():
        flow = w.flows[fid]
        assert path[0] == flow.src and path[-1] == flow.dst
        assert len(set(path)) == len(path)
        for u, v in zip(path, path[1:]):
            assert v in tree4.neighbors(u)


def test_route_mrg_deterministic(tree4):
    w = generate_workload(tree4, 30, 3, 0.15, 0.1, seed=8)
    assert route_mrg(tree4, w, seed=8) == route_mrg(tree4, w, seed=8)


def test_route_mrg_blocked_flows_are_data():
    star = build_star_reduction(2)
    flows = (Flow(0, 0, 1, (0.9,)), Flow(1, 0, 1, (0.9,)), Flow(2, 0, 1, (0.9,)))
    sol = route_mrg(star.topology, Workload(flows, 1, z=None), seed=1)
    assert len(sol.paths) == 2 and len(sol.unrouted) == 1


# -- online arrival / departure ----------------------------------------------------

def test_online_arrival_matches_first_batch_iteration(tree4):
    flow = Flow(0, 0, 4, (0.2, 0.2))
    batch = route_mrg(tree4, Workload((flow,), 2, z=4), seed=0)
    state = ResidualState.fresh(tree4, 2)
    path = online_arrival(state, tree4, flow)
    assert path == batch.paths[0]


def test_arrival_then_departure_restores_state_bitwise(tree4):
    state = ResidualState.fresh(tree4, 3)
    flow = Flow(0, 0, 9, (0.123, 0.456, 0.00789))
    path = online_arrival(state, tree4, flow)
    online_departure(state, tree4, flow, path)
    assert state.active == set()
    assert state.committed == {}
    for v in tree4.processor_ids:
        assert state.residual[v] == [1.0, 1.0, 1.0]


def test_departure_of_unknown_flow_rejected(tree4):
    state = ResidualState.fresh(tree4, 1)
    with pytest.raises(ValueError):
        online_departure(state, tree4, Flow(0, 0, 1, (0.1,)), (0, 16, 1))


def test_arrival_stream_stays_feasible(tree4):
    state = ResidualState.fresh(tree4, 3)
    rng = random.Random(21)
    hosts = tree4.host_ids
    for fid in range(30):
        src, dst = rng.sample(hosts, 2)
        demand = tuple(rng.uniform(0.01, 0.3) for _ in range(3))
        online_arrival(state, tree4, Flow(fid, src, dst, demand))
        for v in tree4.processor_ids:
            load = state.load_of(v)
            assert all(c <= 1 + TOL for c in load)
            # residual identity holds as the state evolves
            assert all(abs(r - (1 - c)) <= TOL for r, c in zip(state.residual[v], load))


def test_arrival_prefers_active_subnetwork(tree4):
    # a second intra-pod flow reuses the already-active aggregation switch
    state = ResidualState.fresh(tree4, 1)
    online_arrival(state, tree4, Flow(0, 0, 2, (0.2,)))
    assert state.active == {16, 24, 17}
    path = online_arrival(state, tree4, Flow(1, 1, 3, (0.2,)))
    assert path == (1, 16, 24, 17, 3)
