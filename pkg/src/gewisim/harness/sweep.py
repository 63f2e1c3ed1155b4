"""Expand a scenario into seeded runs, execute them, and aggregate per sweep point.

Per-run seeds come from ``SeedSequence(master_seed, spawn_key=(crc32(point key), i))``,
so a point's seeds depend only on what the point *is*, not on where it sits
in the sweep: adding or reordering points never changes existing runs.
"""
from __future__ import annotations

import itertools
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from ..cluster import run_distributed_kmeans
from ..link import run_link
from ..network import run_network
from .config import Kind, NOISE_PRESETS, POLICIES, ScenarioConfig

__all__ = ["SweepPoint", "RunRow", "ResultSet", "expand", "derive_seed", "run_sweep", "aggregate"]

log = logging.getLogger(__name__)

CLASSICAL = "classical"


@dataclass(frozen=True)
class SweepPoint:
    index: int
    series: str          # curve label, e.g. "1100/1000ns filo E=200" or "classical"
    params: tuple        # ordered (name, value) pairs written to the CSV
    job: Any             # LinkConfig, Topology or ClusterConfig

    @property
    def key(self) -> str:
        return ";".join(f"{k}={v}" for k, v in self.params)

    def param(self, name):
        return dict(self.params)[name]


@dataclass
class RunRow:
    point: int
    seed_index: int
    seed: int
    values: dict


@dataclass
class ResultSet:
    config: ScenarioConfig
    points: list
    runs: list = field(default_factory=list)
    aggregates: list = field(default_factory=list)
    traces: dict = field(default_factory=dict)   # (point, seed_index) -> link trace


def derive_seed(master_seed: int, point_key: str, seed_index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(zlib.crc32(point_key.encode()), seed_index))
    return int(ss.generate_state(1, np.uint64)[0])


def _link_points(cfg: ScenarioConfig, make):
    axes = cfg.sweep
    series = []
    if axes.baseline:
        series.append((CLASSICAL, NOISE_PRESETS["perfect"], POLICIES["filo"], 0))
    for noise, policy, cap in itertools.product(axes.noise, axes.policies, axes.ebuf_capacities):
        series.append((f"{noise.name} {policy.name} E={cap}", noise, policy, cap))
    points = []
    for label, noise, policy, cap in series:
        for r in axes.arrival_probs:
            params = (
                ("noise", noise.name if label != CLASSICAL else CLASSICAL),
                ("t1", noise.params.t1),
                ("t2", noise.params.t2),
                ("E", cap),
                ("L", cfg.link.buffer_bits),
                ("J", cfg.link.job_bits),
                ("policy", policy.name),
                ("r", r),
            )
            points.append(SweepPoint(len(points), label, params, make(noise, policy, cap, r)))
    return points


def expand(cfg: ScenarioConfig) -> list[SweepPoint]:
    """Every sweep point of ``cfg`` in a fixed order."""
    if cfg.kind is Kind.P2P:
        def make(noise, policy, cap, r):
            return replace(cfg.link, noise=noise.params, overflow=policy.overflow,
                           consume=policy.consume, ebuf_capacity=cap, arrival_prob=r)
        return _link_points(cfg, make)
    if cfg.kind is Kind.NETWORK:
        def make(noise, policy, cap, r):
            topo = cfg.topology.with_links(noise=noise.params, overflow=policy.overflow,
                                           consume=policy.consume, ebuf_capacity=cap)
            return replace(topo, arrival_prob=r)
        return _link_points(cfg, make)
    points = []
    for noise, pairs in itertools.product(cfg.sweep.noise, cfg.sweep.pairs_per_iteration):
        params = (("noise", noise.name), ("t1", noise.params.t1), ("t2", noise.params.t2),
                  ("pairs_per_iteration", pairs))
        job = replace(cfg.cluster, noise=noise.params, pairs_per_iteration=pairs)
        points.append(SweepPoint(len(points), noise.name, params, job))
    return points


def _execute(task):
    kind, job, seed, keep_trace = task
    if kind is Kind.P2P:
        res = run_link(job, seed)
        m = res.metrics
        values = m.as_dict()
        values["assisted_fraction"] = m.assisted_fraction
        return values, (res.trace if keep_trace else None)
    if kind is Kind.NETWORK:
        m = run_network(job, seed).metrics
        values = dict(
            messages_offered=m.messages_offered,
            messages_accepted=m.messages_accepted,
            messages_dropped=m.messages_dropped,
            relay_drops=m.relay_drops,
            messages_delivered=m.messages_delivered,
            messages_errored=m.messages_errored,
            bits_delivered=m.bits_delivered,
            message_error_rate=m.message_error_rate,
            throughput=m.throughput,
            throughput_bps=m.throughput_bps,
        )
        for label, modes in m.link_modes.items():
            values[f"assisted[{label}]"] = modes["assisted"]
            values[f"plain[{label}]"] = modes["plain"]
        return values, None
    res = run_distributed_kmeans(job, seed)
    return dict(total_transmissions=res.total_transmissions, f1=res.f1), None


# metric -> aggregated as mean and std
AGGREGATED = {
    Kind.P2P: ("message_error_rate", "throughput", "assisted_fraction"),
    Kind.NETWORK: ("message_error_rate", "throughput"),
    Kind.CLUSTER: ("f1", "total_transmissions"),
}


def aggregate(kind: Kind, points, runs) -> list[dict]:
    """Mean and sample std of each headline metric per point, in point order."""
    by_point: dict[int, list] = {p.index: [] for p in points}
    for row in runs:
        by_point[row.point].append(row)
    out = []
    for p in points:
        rows = sorted(by_point[p.index], key=lambda r: r.seed_index)
        agg = {"series": p.series, **dict(p.params), "n_seeds": len(rows)}
        for metric in AGGREGATED[kind]:
            vals = np.array([r.values[metric] for r in rows], dtype=float)
            agg[f"{metric}_mean"] = float(vals.mean()) if len(vals) else float("nan")
            agg[f"{metric}_std"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        out.append(agg)
    return out


def run_sweep(cfg: ScenarioConfig, workers: int | None = None) -> ResultSet:
    points = expand(cfg)
    tasks, meta = [], []
    keep = cfg.export_traces and cfg.kind is Kind.P2P
    for p in points:
        for i in range(cfg.seeds_per_point):
            seed = derive_seed(cfg.master_seed, p.key, i)
            tasks.append((cfg.kind, p.job, seed, keep))
            meta.append((p.index, i, seed))
    n_workers = workers if workers is not None else cfg.workers
    log.info("running %d runs over %d points with %d worker(s)", len(tasks), len(points), n_workers)
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            outputs = list(pool.map(_execute, tasks, chunksize=max(1, len(tasks) // (4 * n_workers))))
    else:
        outputs = [_execute(t) for t in tasks]
    result = ResultSet(cfg, points)
    for (point, i, seed), (values, trace) in zip(meta, outputs):
        result.runs.append(RunRow(point, i, seed, values))
        if trace is not None:
            result.traces[(point, i)] = trace
    result.aggregates = aggregate(cfg.kind, points, result.runs)
    return result
