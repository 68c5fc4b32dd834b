"""Metrics, exact small-instance oracles, and the multi-trial experiment harness."""

from __future__ import annotations

import csv
import hashlib
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .baselines import route_mrsp, route_srg, route_srsp
from .hgr import route_hgr
from .mrg import CAP_TOL, RoutingSolution, route_mrg
from .topology import Topology, build_fat_tree
from .workload import Workload, generate_workload


@dataclass(frozen=True)
class Metrics:
    """Headline numbers for one routing run."""

    routed: int
    incomplete: int
    active_processors: int
    total_processors: int
    saving_ratio: float
    congested: int
    runtime_ms: float


def compute_metrics(topology: Topology, solution: RoutingSolution, runtime_ms: float = 0.0) -> Metrics:
    """Derive metrics from a solution; congestion is judged on full loads in every dimension."""
    total = len(topology.processor_ids)
    active = len(solution.active)
    congested = sum(
        1 for v in topology.processor_ids
        if any(c > 1.0 + CAP_TOL for c in solution.load[v])
    )
    return Metrics(
        routed=len(solution.paths),
        incomplete=len(solution.unrouted),
        active_processors=active,
        total_processors=total,
        saving_ratio=(total - active) / total,
        congested=congested,
        runtime_ms=runtime_ms,
    )


# -- exact oracles -----------------------------------------------------------------
# Exponential searches, deliberately small: they exist to certify the heuristics
# on instances where the truth is computable.

_MAX_ORACLE_PROCESSORS = 12
_MAX_ORACLE_FLOWS = 6
_MAX_ORACLE_ITEMS = 8


def _simple_paths(topology: Topology, allowed_interior: frozenset[int], s: int, t: int):
    adj = topology._adj
    if s == t:
        yield [s]
        return
    path = [s]
    seen = {s}

    def walk(u):
        for v in adj[u]:
            if v == t:
                yield path + [t]
            elif v in allowed_interior and v not in seen:
                path.append(v)
                seen.add(v)
                yield from walk(v)
                path.pop()
                seen.remove(v)

    yield from walk(s)


def _subset_feasible(topology: Topology, subset: frozenset[int], flows, dims: int) -> bool:
    allowed_interior = subset | topology.host_set
    loads = {v: [0.0] * dims for v in subset}

    def place(i: int) -> bool:
        if i == len(flows):
            return True
        flow = flows[i]
        for path in _simple_paths(topology, allowed_interior, flow.src, flow.dst):
            on_path = [v for v in path if v in subset]
            if any(loads[v][k] + flow.demand[k] > 1.0 + CAP_TOL
                   for v in on_path for k in range(dims)):
                continue
            for v in on_path:
                l = loads[v]
                for k in range(dims):
                    l[k] += flow.demand[k]
            if place(i + 1):
                return True
            for v in on_path:
                l = loads[v]
                for k in range(dims):
                    l[k] -= flow.demand[k]
        return False

    return place(0)


def oracle_min_active(topology: Topology, workload: Workload) -> int | None:
    """Exact minimum number of load-carrying processors, or ``None`` if infeasible.

    Enumerates processor subsets by increasing size and decides each by an
    exhaustive single-path assignment search. Refuses instances beyond
    12 processors or 6 flows.
    """
    procs = topology.processor_ids
    if len(procs) > _MAX_ORACLE_PROCESSORS:
        raise ValueError(f"instance too large: {len(procs)} processors (limit {_MAX_ORACLE_PROCESSORS})")
    if len(workload.flows) > _MAX_ORACLE_FLOWS:
        raise ValueError(f"instance too large: {len(workload.flows)} flows (limit {_MAX_ORACLE_FLOWS})")
    if not workload.flows:
        return 0
    for size in range(len(procs) + 1):
        for subset in itertools.combinations(procs, size):
            if _subset_feasible(topology, frozenset(subset), workload.flows, workload.dims):
                return size
    return None


def oracle_min_bins(items: Sequence[Sequence[float]]) -> int:
    """Exact minimum bin count for unit vector bin packing (at most 8 items)."""
    items = [tuple(float(c) for c in item) for item in items]
    if len(items) > _MAX_ORACLE_ITEMS:
        raise ValueError(f"instance too large: {len(items)} items (limit {_MAX_ORACLE_ITEMS})")
    for i, item in enumerate(items):
        if any(c <= 0 or c > 1 for c in item):
            raise ValueError(f"item {i} does not fit a unit bin: {item}")
    if not items:
        return 0
    dims = len(items[0])
    best = len(items)
    bins: list[list[float]] = []

    def search(i: int) -> None:
        nonlocal best
        if len(bins) >= best:
            return
        if i == len(items):
            best = len(bins)
            return
        item = items[i]
        for b in bins:
            if all(b[k] + item[k] <= 1.0 + CAP_TOL for k in range(dims)):
                for k in range(dims):
                    b[k] += item[k]
                search(i + 1)
                for k in range(dims):
                    b[k] -= item[k]
        if len(bins) + 1 < best:
            bins.append(list(item))
            search(i + 1)
            bins.pop()

    search(0)
    return best


# -- experiment harness ---------------------------------------------------------------

def _route_hgr_solution(topology: Topology, workload: Workload, seed: int = 0) -> RoutingSolution:
    return route_hgr(topology, workload)[0]


ROUTERS: dict[str, Callable[[Topology, Workload, int], RoutingSolution]] = {
    "mrg": route_mrg,
    "hgr": _route_hgr_solution,
    "srsp": route_srsp,
    "srg": route_srg,
    "mrsp": route_mrsp,
}

CSV_COLUMNS = ("algo", "z", "K", "M", "trial", "routed", "incomplete", "active",
               "total", "saving_ratio", "congested", "runtime_ms")


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: every algorithm crossed with every flow count, ``trials`` times each.

    Within a (flow count, trial) cell all algorithms see the identical
    workload. Runtime measurement is opt-in so that result files stay
    byte-identical across reruns; with it off, runtime_ms is written as 0.0.
    """

    z: int = 8
    dims: int = 5
    flow_counts: tuple[int, ...] = (20, 40, 60, 80, 100, 120)
    algorithms: tuple[str, ...] = ("mrg", "hgr", "srsp", "srg", "mrsp")
    trials: int = 20
    base_seed: int = 0
    mean: float = 0.02
    std: float = 0.02
    jobs: int = 1
    measure_runtime: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.flow_counts:
            raise ValueError("flow_counts must be nonempty")
        unknown = [a for a in self.algorithms if a not in ROUTERS]
        if unknown:
            raise ValueError(f"unknown algorithms: {unknown}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


@dataclass(frozen=True)
class ResultRow:
    algo: str
    z: int
    dims: int
    flows: int
    trial: str  # "0".."N-1", "mean", or "std"
    metrics: Metrics | None
    error: str | None = None

    def csv_values(self) -> list[str]:
        head = [self.algo, str(self.z), str(self.dims), str(self.flows), self.trial]
        if self.metrics is None:
            return head + ["error"] * 7
        m = self.metrics
        return head + [str(m.routed), str(m.incomplete), str(m.active_processors),
                       str(m.total_processors), str(m.saving_ratio), str(m.congested),
                       str(m.runtime_ms)]


def cell_seed(base_seed: int, flow_count: int, trial: int) -> int:
    """Stable per-cell workload seed, identical across algorithms and platforms."""
    digest = hashlib.sha256(f"{base_seed}:{flow_count}:{trial}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _summary_rows(cell_rows: list[ResultRow], trials: int) -> list[ResultRow]:
    good = [r.metrics for r in cell_rows if r.metrics is not None]
    proto = cell_rows[0]
    if not good:
        return [ResultRow(proto.algo, proto.z, proto.dims, proto.flows, "mean", None, "all trials failed")]

    n = len(good)

    def agg(fn) -> Metrics:
        return Metrics(*(fn([getattr(m, f) for m in good])
                         for f in ("routed", "incomplete", "active_processors",
                                   "total_processors", "saving_ratio", "congested", "runtime_ms")))

    def pstd(xs: list[float]) -> float:
        mu = sum(xs) / n
        return (sum((x - mu) ** 2 for x in xs) / n) ** 0.5

    mean = agg(lambda xs: sum(xs) / n)
    rows = [ResultRow(proto.algo, proto.z, proto.dims, proto.flows, "mean", mean)]
    if trials >= 2:
        rows.append(ResultRow(proto.algo, proto.z, proto.dims, proto.flows, "std", agg(pstd)))
    return rows


def _run_cell(args: tuple[ExperimentConfig, str, int]) -> list[ResultRow]:
    config, algo, flow_count = args
    topology = build_fat_tree(config.z)
    router = ROUTERS[algo]
    rows: list[ResultRow] = []
    for trial in range(config.trials):
        seed = cell_seed(config.base_seed, flow_count, trial)
        workload = generate_workload(topology, flow_count, config.dims, config.mean, config.std, seed)
        try:
            start = time.perf_counter()
            solution = router(topology, workload, seed)
            elapsed_ms = (time.perf_counter() - start) * 1000.0
            metrics = compute_metrics(topology, solution,
                                      elapsed_ms if config.measure_runtime else 0.0)
            rows.append(ResultRow(algo, config.z, config.dims, flow_count, str(trial), metrics))
        except Exception as exc:
            rows.append(ResultRow(algo, config.z, config.dims, flow_count, str(trial), None, repr(exc)))
    rows.extend(_summary_rows(rows, config.trials))
    return rows


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """Run the sweep and return rows in canonical (algorithm, flow count, trial) order."""
    cells = [(config, algo, m) for algo in config.algorithms for m in config.flow_counts]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            per_cell = list(pool.map(_run_cell, cells))
    else:
        per_cell = [_run_cell(cell) for cell in cells]
    rows: list[ResultRow] = []
    for cell_rows in per_cell:
        rows.extend(cell_rows)
    return rows


def write_results_csv(rows: Sequence[ResultRow], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.csv_values())
