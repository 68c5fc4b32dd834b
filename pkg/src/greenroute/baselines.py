"""Comparison algorithms: SRSP, SRG, and MRSP.

The shortest-path baselines are energy-oblivious: each flow, in list order,
takes a hop-minimal path chosen uniformly at random among all hop-minimal
paths whose nodes pass the capability check (ECMP-style spreading, seeded
and deterministic). "Single-resource" variants check capability on
dimension 1 only; committed loads are always recorded in all dimensions so
congestion stays measurable. SRG is the greedy router run on the
dimension-1 projection of every vector.
"""

from __future__ import annotations

import random

from .mrg import CAP_TOL, RoutingSolution, _route_greedy, finalize_solution
from .topology import Topology
from .workload import Workload


def _sample_shortest(topology: Topology, allowed: set[int], s: int, t: int,
                     rng: random.Random) -> list[int] | None:
    """Uniform random draw among hop-minimal s-t paths with interiors in ``allowed``."""
    if s == t:
        return [s]
    adj = topology._adj
    dist = {s: 0}
    frontier = [s]
    level = 0
    while frontier and t not in dist:
        level += 1
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v in dist:
                    continue
                if v == t:
                    dist[v] = level
                elif v in allowed:
                    dist[v] = level
                    nxt.append(v)
        frontier = nxt
    if t not in dist:
        return None

    # Count, for every node on some shortest path, how many shortest
    # continuations reach t; then walk from s picking successors with
    # probability proportional to those counts.
    target = dist[t]
    by_level: list[list[int]] = [[] for _ in range(target)]
    for v, d in dist.items():
        if d < target and (v == s or d > 0):
            by_level[d].append(v)
    count = {t: 1}
    for d in range(target - 1, -1, -1):
        for v in by_level[d]:
            c = 0
            for u in adj[v]:
                if dist.get(u) == d + 1 and u in count:
                    c += count[u]
            if c:
                count[v] = c
    path = [s]
    v = s
    while v != t:
        d = dist[v]
        options = [(u, count[u]) for u in adj[v] if dist.get(u) == d + 1 and u in count]
        total = sum(c for _, c in options)
        r = rng.random() * total
        acc = 0
        chosen = options[-1][0]
        for u, c in options:
            acc += c
            if r < acc:
                chosen = u
                break
        path.append(chosen)
        v = chosen
    return path


def _route_shortest(topology: Topology, workload: Workload, seed: int,
                    view: tuple[int, ...]) -> RoutingSolution:
    dims = workload.dims
    rng = random.Random(seed)
    procs = topology.processor_ids
    residual = {v: [1.0] * dims for v in procs}
    load = {v: [0.0] * dims for v in procs}
    paths: dict[int, tuple[int, ...]] = {}
    unrouted: set[int] = set()
    for flow in workload.flows:
        demand = flow.demand
        allowed = {
            v for v in procs
            if all(residual[v][k] >= demand[k] - CAP_TOL for k in view)
        }
        path = _sample_shortest(topology, allowed, flow.src, flow.dst, rng)
        if path is None:
            unrouted.add(flow.id)
            continue
        paths[flow.id] = tuple(path)
        for v in path:
            if topology.is_processor(v):
                r = residual[v]
                l = load[v]
                for k in range(dims):
                    r[k] -= demand[k]
                    l[k] += demand[k]
    return finalize_solution(topology, paths, unrouted, load)


def route_srsp(topology: Topology, workload: Workload, seed: int = 0) -> RoutingSolution:
    """Single-Resource Shortest Path: hop-minimal routing, capability on dimension 1 only."""
    return _route_shortest(topology, workload, seed, (0,))


def route_mrsp(topology: Topology, workload: Workload, seed: int = 0) -> RoutingSolution:
    """Multi-Resource Shortest Path: hop-minimal routing, capability in all dimensions."""
    return _route_shortest(topology, workload, seed, tuple(range(workload.dims)))


def route_srg(topology: Topology, workload: Workload, seed: int = 0) -> RoutingSolution:
    """Single-Resource Green: the greedy router with every vector projected to dimension 1."""
    return _route_greedy(topology, workload, seed, (0,))
