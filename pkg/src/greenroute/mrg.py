"""Greedy multi-resource routing (MRG) and its primitives.

The router works through the flow list progressively. Each iteration first
searches, in list order, for a flow whose endpoints are already connected by
active nodes with enough residual capacity; failing that it picks a pending
flow uniformly at random (more nodes will have to wake up for it). The chosen
flow is then routed on the full capacity-feasible network by a weighted
shortest path, where active nodes are scored by how badly their residual
profile mismatches the flow's demand profile (inversion count) and inactive
nodes carry a weight strictly above any possible inversion count. Node
weights are turned into link weights by halving, which preserves the argmin
over paths, so plain Dijkstra applies.

Conventions fixed for reproducibility: residuals start at the normalized
capacity (all ones); a node is incapable of a flow iff some residual
dimension falls short of the demand (absolute tolerance 1e-9); hosts carry
no capacity, weigh 0, and never count as active; Dijkstra breaks ties by
fewer hops, then the lexicographically smallest node id sequence; the random
pick uses Python's Mersenne Twister seeded from the run seed.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .topology import Topology
from .workload import Flow, Workload

CAP_TOL = 1e-9


# -- vector primitives ---------------------------------------------------------

def is_capable(residual: Sequence[float], demand: Sequence[float]) -> bool:
    """True iff ``residual`` covers ``demand`` in every dimension (tolerance 1e-9)."""
    if len(residual) != len(demand):
        raise ValueError(f"vector length mismatch: {len(residual)} vs {len(demand)}")
    return all(r >= d - CAP_TOL for r, d in zip(residual, demand))


def inv_count(x: Sequence[float], y: Sequence[float]) -> int:
    """Number of index pairs on which ``x`` and ``y`` are ordered oppositely.

    Ties in either vector contribute nothing; the count is bounded by
    n(n-1)/2 and is symmetric in its arguments.
    """
    if len(x) != len(y):
        raise ValueError(f"vector length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if (dx > 0 and dy < 0) or (dx < 0 and dy > 0):
                count += 1
    return count


# -- state and solutions ---------------------------------------------------------

@dataclass
class ResidualState:
    """Mutable per-processor residual capacities plus the active set.

    ``committed`` remembers flow paths so online departures can be validated
    and reversed. All vectors have the workload's dimension count.
    """

    residual: dict[int, list[float]]
    active: set[int]
    committed: dict[int, tuple[int, ...]] = field(default_factory=dict)

    @classmethod
    def fresh(cls, topology: Topology, dims: int) -> "ResidualState":
        return cls({v: [1.0] * dims for v in topology.processor_ids}, set())

    def load_of(self, node_id: int) -> tuple[float, ...]:
        return tuple(1.0 - r for r in self.residual[node_id])


@dataclass(frozen=True)
class RoutingSolution:
    """Result of routing one workload: committed paths, the carrying set, and loads.

    ``active`` is exactly the set of processors with a nonzero aggregate
    load; every flow id appears either in ``paths`` or in ``unrouted``.
    """

    paths: dict[int, tuple[int, ...]]
    active: frozenset[int]
    unrouted: frozenset[int]
    load: dict[int, tuple[float, ...]]


def save_solution(solution: RoutingSolution, path: str | Path, extra: dict | None = None) -> None:
    """Dump a solution as JSON: per-flow paths, unrouted ids, active set, loads."""
    doc = {
        "paths": {str(fid): list(p) for fid, p in sorted(solution.paths.items())},
        "unrouted": sorted(solution.unrouted),
        "active": sorted(solution.active),
        "load": {str(v): list(vec) for v, vec in sorted(solution.load.items())},
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, separators=(", ", ": ")) + "\n")


# -- graph primitives ------------------------------------------------------------

def is_connected(topology: Topology, allowed_nodes: Iterable[int], s: int, t: int) -> bool:
    """True iff ``t`` is reachable from ``s`` through ``allowed_nodes`` plus the endpoints."""
    topology._check_id(s)
    topology._check_id(t)
    if s == t:
        return True
    allowed = allowed_nodes if isinstance(allowed_nodes, (set, frozenset)) else set(allowed_nodes)
    adj = topology._adj
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v == t:
                return True
            if v in allowed and v not in seen:
                seen.add(v)
                stack.append(v)
    return False


def shortest_path(
    topology: Topology,
    allowed_nodes: Iterable[int],
    link_weights: Mapping[tuple[int, int], float] | None,
    s: int,
    t: int,
) -> list[int] | None:
    """Minimum-weight simple path from ``s`` to ``t`` with interior nodes in ``allowed_nodes``.

    ``link_weights`` maps each undirected edge (u, v) with u < v to a
    nonnegative weight; ``None`` means unit weights (hop count). Ties break
    by fewer hops, then the lexicographically smallest node id sequence.
    Returns ``None`` when no such path exists.
    """
    topology._check_id(s)
    topology._check_id(t)
    if link_weights is not None and link_weights and min(link_weights.values()) < 0:
        raise ValueError("link weights must be nonnegative")
    if s == t:
        return [s]
    allowed = allowed_nodes if isinstance(allowed_nodes, (set, frozenset)) else set(allowed_nodes)
    adj = topology._adj
    done: set[int] = set()
    heap: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 0, (s,))]
    while heap:
        cost, hops, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == t:
            return list(path)
        for v in adj[u]:
            if v in done:
                continue
            if v != t and v not in allowed:
                continue
            if link_weights is None:
                w = 1.0
            else:
                w = link_weights[(u, v) if u < v else (v, u)]
            heapq.heappush(heap, (cost + w, hops + 1, path + (v,)))
    return None


# -- weight assignment -----------------------------------------------------------

def _node_weights(
    residual: Mapping[int, Sequence[float]],
    active: set[int],
    demand: Sequence[float],
    topology: Topology,
    view: tuple[int, ...],
) -> dict[int, int]:
    inactive_w = len(view) * (len(view) - 1) // 2 + 1
    demand_view = [demand[k] for k in view]
    weights: dict[int, int] = {}
    for v in range(len(topology)):
        if topology.is_host(v):
            weights[v] = 0
        elif v in active:
            r = residual[v]
            weights[v] = inv_count([r[k] for k in view], demand_view)
        else:
            weights[v] = inactive_w
    return weights


def assign_node_weights(state: ResidualState, demand: Sequence[float], topology: Topology) -> dict[int, int]:
    """Per-node routing weights for one flow.

    Active processors get their inversion count against the demand, inactive
    processors get K(K-1)/2 + 1 (strictly above any inversion count), hosts
    get 0.
    """
    return _node_weights(state.residual, state.active, demand, topology, tuple(range(len(demand))))


def node_to_link_weights(topology: Topology, node_weights: Mapping[int, float]) -> dict[tuple[int, int], float]:
    """Half-sum link weights: w(u, v) = (w_u + w_v) / 2 for every edge.

    For any s-t path the link weights then telescope to the path's node
    weight total minus half the endpoint weights, so link-weighted and
    node-weighted shortest paths coincide.
    """
    return {(u, v): (node_weights[u] + node_weights[v]) / 2 for u, v in topology.edges}


# -- the router --------------------------------------------------------------------

def _route_greedy(topology: Topology, workload: Workload, seed: int, view: tuple[int, ...]) -> RoutingSolution:
    dims = workload.dims
    rng = random.Random(seed)
    procs = topology.processor_ids
    hosts = topology.host_set
    residual: dict[int, list[float]] = {v: [1.0] * dims for v in procs}
    load: dict[int, list[float]] = {v: [0.0] * dims for v in procs}
    active: set[int] = set()
    pending = list(workload.flows)
    paths: dict[int, tuple[int, ...]] = {}
    unrouted: set[int] = set()

    def capable(v: int, demand: tuple[float, ...]) -> bool:
        r = residual[v]
        return all(r[k] >= demand[k] - CAP_TOL for k in view)

    while pending:
        pick = None
        for i, flow in enumerate(pending):
            usable = {v for v in active if capable(v, flow.demand)}
            if is_connected(topology, usable, flow.src, flow.dst):
                pick = i
                break
        if pick is None:
            pick = rng.randrange(len(pending))
        flow = pending.pop(pick)
        demand = flow.demand

        allowed = {v for v in procs if capable(v, demand)} | hosts
        weights = _node_weights(residual, active, demand, topology, view)
        link_w = node_to_link_weights(topology, weights)
        path = shortest_path(topology, allowed, link_w, flow.src, flow.dst)
        if path is None:
            unrouted.add(flow.id)
            continue
        paths[flow.id] = tuple(path)
        for v in path:
            if v not in hosts:
                r = residual[v]
                l = load[v]
                for k in range(dims):
                    r[k] -= demand[k]
                    l[k] += demand[k]
                active.add(v)
    return finalize_solution(topology, paths, unrouted, load)


def finalize_solution(
    topology: Topology,
    paths: dict[int, tuple[int, ...]],
    unrouted: set[int],
    load: Mapping[int, Sequence[float]],
) -> RoutingSolution:
    """Package raw routing bookkeeping into an immutable solution."""
    active = frozenset(v for v in topology.processor_ids if any(load[v]))
    return RoutingSolution(
        paths=dict(paths),
        active=active,
        unrouted=frozenset(unrouted),
        load={v: tuple(load[v]) for v in topology.processor_ids},
    )


def route_mrg(topology: Topology, workload: Workload, seed: int = 0) -> RoutingSolution:
    """Route a workload with the greedy multi-resource scheme (all dimensions)."""
    return _route_greedy(topology, workload, seed, tuple(range(workload.dims)))


# -- online extension ----------------------------------------------------------------

def _commit(state: ResidualState, flow: Flow, path: Sequence[int], topology: Topology) -> None:
    for v in path:
        if topology.is_processor(v):
            r = state.residual[v]
            for k, d in enumerate(flow.demand):
                r[k] -= d
            state.active.add(v)
    state.committed[flow.id] = tuple(path)


def online_arrival(state: ResidualState, topology: Topology, flow: Flow) -> tuple[int, ...] | None:
    """Route one arriving flow against live state; commit and return its path.

    Tries the subnetwork of active capable nodes first; only if that cannot
    connect the endpoints does routing fall back to the full capable network
    with the usual weight assignment. Returns ``None`` (state untouched) when
    even the full network cannot carry the flow.
    """
    if flow.id in state.committed:
        raise ValueError(f"flow {flow.id} is already routed")
    demand = flow.demand
    usable_active = {v for v in state.active if is_capable(state.residual[v], demand)}
    weights = assign_node_weights(state, demand, topology)
    link_w = node_to_link_weights(topology, weights)
    if is_connected(topology, usable_active, flow.src, flow.dst):
        path = shortest_path(topology, usable_active, link_w, flow.src, flow.dst)
    else:
        allowed = {v for v in topology.processor_ids if is_capable(state.residual[v], demand)}
        allowed |= topology.host_set
        path = shortest_path(topology, allowed, link_w, flow.src, flow.dst)
    if path is None:
        return None
    _commit(state, flow, path, topology)
    return tuple(path)


def online_departure(state: ResidualState, topology: Topology, flow: Flow, path: Sequence[int]) -> None:
    """Return a departed flow's reservation and deactivate drained processors.

    Residuals that return to full capacity (within 1e-9) are snapped to
    exactly 1.0, so an arrival followed by its departure restores the
    initial state bit for bit.
    """
    committed = state.committed.get(flow.id)
    if committed is None:
        raise ValueError(f"flow {flow.id} was never routed on this state")
    if committed != tuple(path):
        raise ValueError(f"flow {flow.id}: departure path does not match the committed path")
    for v in path:
        if topology.is_processor(v):
            r = state.residual[v]
            for k, d in enumerate(flow.demand):
                r[k] += d
            if all(abs(x - 1.0) <= CAP_TOL for x in r):
                state.residual[v] = [1.0] * len(r)
                state.active.discard(v)
    del state.committed[flow.id]
