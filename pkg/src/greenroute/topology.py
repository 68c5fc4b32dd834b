"""Fat-tree topologies, star fixtures, and the graph substrate for routing.

Node id layout is fixed so that workloads and results are reproducible:
hosts come first, then edge, aggregation and core switches, each layer in
pod/position order. Only edge/aggregation/core nodes ("packet processors")
carry capacity; hosts are pure traffic endpoints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence


class NodeKind(str, Enum):
    HOST = "host"
    EDGE = "edge"
    AGGREGATION = "aggregation"
    CORE = "core"


@dataclass(frozen=True)
class Node:
    """One topology node. ``pod`` is set for edge/aggregation switches only."""

    id: int
    kind: NodeKind
    pod: int | None
    pos: int


class Topology:
    """Immutable undirected graph of end hosts and packet processors.

    ``z`` is the fat-tree arity for trees built by :func:`build_fat_tree`
    and ``None`` for arbitrary graphs (star fixtures, test graphs). The
    object is never mutated after construction and is safe for concurrent
    reads.
    """

    def __init__(
        self,
        nodes: Sequence[Node],
        edges: Iterable[tuple[int, int]],
        z: int | None = None,
    ):
        self.nodes = tuple(nodes)
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise ValueError(f"node ids must be dense from 0, got id {node.id} at index {i}")
        n = len(self.nodes)
        adj: list[set[int]] = [set() for _ in range(n)]
        canonical: set[tuple[int, int]] = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) references an unknown node")
            adj[u].add(v)
            adj[v].add(u)
            canonical.add((u, v) if u < v else (v, u))
        self.z = z
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(canonical))
        self._adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in adj)
        self.host_ids = tuple(nd.id for nd in self.nodes if nd.kind is NodeKind.HOST)
        self.processor_ids = tuple(nd.id for nd in self.nodes if nd.kind is not NodeKind.HOST)
        self._host_set = frozenset(self.host_ids)
        if z is not None:
            half = z // 2
            base = z**3 // 4 + z * half
            self._agg_ids = tuple(tuple(base + p * half + a for a in range(half)) for p in range(z))
            core_base = base + z * half
            self._core_ids = tuple(core_base + i for i in range(half * half))

    # -- generic queries ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.nodes)

    def neighbors(self, node_id: int) -> frozenset[int]:
        """Symmetric adjacency set of ``node_id``."""
        self._check_id(node_id)
        return frozenset(self._adj[node_id])

    def kind(self, node_id: int) -> NodeKind:
        self._check_id(node_id)
        return self.nodes[node_id].kind

    def is_host(self, node_id: int) -> bool:
        return node_id in self._host_set

    def is_processor(self, node_id: int) -> bool:
        self._check_id(node_id)
        return node_id not in self._host_set

    @property
    def host_set(self) -> frozenset[int]:
        return self._host_set

    def _check_id(self, node_id: int) -> None:
        if not (isinstance(node_id, int) and 0 <= node_id < len(self.nodes)):
            raise KeyError(f"unknown node id {node_id!r}")

    # -- fat-tree structure -------------------------------------------------

    def _require_fat_tree(self) -> int:
        if self.z is None:
            raise ValueError("operation requires a fat-tree topology")
        return self.z

    @property
    def hosts_per_pod(self) -> int:
        z = self._require_fat_tree()
        return z * z // 4

    def pod_of_host(self, host_id: int) -> int:
        self._require_fat_tree()
        if not self.is_host(host_id):
            raise ValueError(f"node {host_id} is not a host")
        return host_id // self.hosts_per_pod

    def host_index_in_pod(self, host_id: int) -> int:
        self._require_fat_tree()
        if not self.is_host(host_id):
            raise ValueError(f"node {host_id} is not a host")
        return host_id % self.hosts_per_pod

    def edge_of_host(self, host_id: int) -> int:
        """The unique edge switch a host hangs off."""
        self._require_fat_tree()
        if not self.is_host(host_id):
            raise ValueError(f"node {host_id} is not a host")
        return self._adj[host_id][0]

    def aggregation_id(self, pod: int, pos: int) -> int:
        z = self._require_fat_tree()
        half = z // 2
        if not (0 <= pod < z and 0 <= pos < half):
            raise ValueError(f"no aggregation switch at pod {pod}, position {pos}")
        n_hosts = z**3 // 4
        n_edge = z * half
        return n_hosts + n_edge + pod * half + pos

    def aggregation_ids(self, pod: int) -> tuple[int, ...]:
        self._require_fat_tree()
        return self._agg_ids[pod]

    def core_id(self, group: int, index: int) -> int:
        z = self._require_fat_tree()
        half = z // 2
        if not (0 <= group < half and 0 <= index < half):
            raise ValueError(f"no core switch at group {group}, index {index}")
        n_hosts = z**3 // 4
        return n_hosts + 2 * z * half + group * half + index

    def core_ids(self) -> tuple[int, ...]:
        """All core switches in global position order (group-major)."""
        self._require_fat_tree()
        return self._core_ids

    def core_group(self, core_id: int) -> int:
        """Core group of a core switch; group g attaches to aggregation position g in every pod."""
        z = self._require_fat_tree()
        if self.kind(core_id) is not NodeKind.CORE:
            raise ValueError(f"node {core_id} is not a core switch")
        return self.nodes[core_id].pos // (z // 2)


@dataclass(frozen=True)
class StarReduction:
    """Star fixture: ``src`` and ``dst`` hosts joined through parallel middle processors.

    Every simple src-to-dst path crosses exactly one middle node, so routing
    flows on this graph is the same combinatorial problem as packing their
    demand vectors into unit bins.
    """

    topology: Topology
    src: int
    dst: int
    middle_ids: tuple[int, ...]


def build_fat_tree(z: int) -> Topology:
    """Build the canonical z-ary fat-tree (z even, >= 2).

    Counts: z^3/4 hosts, z^2/2 edge, z^2/2 aggregation, z^2/4 core switches.
    Each edge switch connects z/2 hosts plus all z/2 aggregation switches of
    its pod; the aggregation switch at position p connects to all z/2 core
    switches of core group p.
    """
    if not isinstance(z, int) or z < 2 or z % 2:
        raise ValueError(f"fat-tree arity must be an even integer >= 2, got {z!r}")
    half = z // 2
    hosts_per_pod = half * half
    n_hosts = z * hosts_per_pod
    n_edge = z * half
    n_agg = z * half

    nodes: list[Node] = []
    for h in range(n_hosts):
        nodes.append(Node(h, NodeKind.HOST, None, h))
    for p in range(z):
        for e in range(half):
            nodes.append(Node(n_hosts + p * half + e, NodeKind.EDGE, p, p * half + e))
    for p in range(z):
        for a in range(half):
            nodes.append(Node(n_hosts + n_edge + p * half + a, NodeKind.AGGREGATION, p, p * half + a))
    for g in range(half):
        for c in range(half):
            nodes.append(Node(n_hosts + n_edge + n_agg + g * half + c, NodeKind.CORE, None, g * half + c))

    edges: list[tuple[int, int]] = []
    for p in range(z):
        for e in range(half):
            edge_id = n_hosts + p * half + e
            for i in range(half):
                edges.append((p * hosts_per_pod + e * half + i, edge_id))
            for a in range(half):
                edges.append((edge_id, n_hosts + n_edge + p * half + a))
        for a in range(half):
            agg_id = n_hosts + n_edge + p * half + a
            for c in range(half):
                edges.append((agg_id, n_hosts + n_edge + n_agg + a * half + c))
    return Topology(nodes, edges, z=z)


def build_star_reduction(item_count: int) -> StarReduction:
    """Star graph with ``item_count`` parallel middle processors between two hosts."""
    if not isinstance(item_count, int) or item_count < 1:
        raise ValueError(f"item_count must be a positive integer, got {item_count!r}")
    nodes = [Node(0, NodeKind.HOST, None, 0), Node(1, NodeKind.HOST, None, 1)]
    edges = []
    middles = []
    for i in range(item_count):
        mid = 2 + i
        nodes.append(Node(mid, NodeKind.EDGE, None, i))
        edges.append((0, mid))
        edges.append((mid, 1))
        middles.append(mid)
    return StarReduction(Topology(nodes, edges, z=None), 0, 1, tuple(middles))


def neighbors(topology: Topology, node_id: int) -> frozenset[int]:
    """Symmetric adjacency set of ``node_id`` (KeyError on unknown id)."""
    return topology.neighbors(node_id)


# -- dump / load --------------------------------------------------------------
# One JSON document: {"z": int|null, "nodes": [[id, kind, pod, pos], ...],
# "edges": [[u, v], ...]} with nodes in id order and edges sorted (u < v).

def save_topology(topology: Topology, path: str | Path) -> None:
    doc = {
        "z": topology.z,
        "nodes": [[nd.id, nd.kind.value, nd.pod, nd.pos] for nd in topology.nodes],
        "edges": [list(e) for e in topology.edges],
    }
    Path(path).write_text(json.dumps(doc, separators=(", ", ": ")) + "\n")


def load_topology(path: str | Path) -> Topology:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    try:
        nodes = [Node(int(i), NodeKind(kind), pod if pod is None else int(pod), int(pos))
                 for i, kind, pod, pos in doc["nodes"]]
        edges = [(int(u), int(v)) for u, v in doc["edges"]]
        z = doc["z"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed topology record: {exc}") from exc
    return Topology(nodes, edges, z=None if z is None else int(z))
