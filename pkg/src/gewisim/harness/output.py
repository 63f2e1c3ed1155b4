"""CSV and SVG writers for sweep results.

Every CSV starts with a ``schema_version`` column; bump ``SCHEMA_VERSION``
whenever a header changes.
"""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .config import Kind  # noqa: E402
from .sweep import CLASSICAL, ResultSet  # noqa: E402

__all__ = ["SCHEMA_VERSION", "emit_outputs", "write_runs_csv", "write_summary_csv",
           "write_trace_csv", "plot_link_sweep", "plot_cluster_sweep"]

SCHEMA_VERSION = 1

TRACE_FIELDS = ["schema_version", "seq", "send_tick", "complete_tick", "arrival_time_ns", "mode",
                "bits", "decoded", "error", "pair_ids", "sender_ages_ns", "receiver_ages_ns"]

plt.rcParams["svg.hashsalt"] = "gewisim"


def _fmt(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v


def _write(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_runs_csv(result: ResultSet, path) -> Path:
    points = {p.index: p for p in result.points}
    first = points[0] if points else None
    param_names = [k for k, _ in first.params] if first else []
    metric_names = list(result.runs[0].values) if result.runs else []
    header = ["schema_version", "series", *param_names, "seed_index", "seed", *metric_names]
    rows = []
    for run in result.runs:
        p = points[run.point]
        rows.append([SCHEMA_VERSION, p.series, *(v for _, v in p.params), run.seed_index, run.seed,
                     *(run.values[m] for m in metric_names)])
    return _write(Path(path), header, rows)


def write_summary_csv(result: ResultSet, path) -> Path:
    if not result.aggregates:
        return _write(Path(path), ["schema_version"], [])
    keys = list(result.aggregates[0])
    rows = [[SCHEMA_VERSION, *(a[k] for k in keys)] for a in result.aggregates]
    return _write(Path(path), ["schema_version", *keys], rows)


def write_trace_csv(trace, path) -> Path:
    """One row per delivered message of a point-to-point run."""
    def bits(seq):
        return "".join(str(b) for b in seq)

    rows = []
    for rec in trace:
        rows.append([
            SCHEMA_VERSION, rec.seq, rec.send_tick, rec.complete_tick, rec.arrival_time, rec.mode.value,
            bits(rec.bits), bits(rec.decoded), rec.error,
            " ".join(str(i) for i in rec.pair_ids),
            " ".join(repr(a) for a, _ in rec.pair_ages),
            " ".join(repr(b) for _, b in rec.pair_ages),
        ])
    return _write(Path(path), TRACE_FIELDS, rows)


def _series(result: ResultSet, x: str, y: str):
    curves: dict[str, list] = {}
    for agg in result.aggregates:
        curves.setdefault(agg["series"], []).append((agg[x], agg[y]))
    return {k: sorted(v) for k, v in curves.items()}


def plot_link_sweep(result: ResultSet, path) -> Path:
    """Throughput and error rate against arrival probability, one curve per series."""
    fig, (ax_t, ax_e) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    thr = _series(result, "r", "throughput_mean")
    err = _series(result, "r", "message_error_rate_mean")
    for name in thr:
        style = dict(color="black", linestyle="--") if name == CLASSICAL else dict(marker=".")
        label = "entanglement-free" if name == CLASSICAL else name
        xs, ys = zip(*thr[name])
        ax_t.plot(xs, ys, label=label, **style)
        if name != CLASSICAL:
            xs, ys = zip(*err[name])
            ax_e.plot(xs, ys, label=label, **style)
    ax_t.set_ylabel("average throughput [bits/tick]")
    ax_e.set_ylabel("message error rate")
    ax_e.set_xlabel("message arrival probability r")
    ax_e.set_ylim(-0.02, 1.02)
    ax_t.legend(fontsize=7)
    ax_t.set_title(result.config.name)
    fig.tight_layout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)


def plot_cluster_sweep(result: ResultSet, path) -> Path:
    """F1 against pairs per iteration, transmissions on a secondary axis."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    f1 = _series(result, "pairs_per_iteration", "f1_mean")
    sends = _series(result, "pairs_per_iteration", "total_transmissions_mean")
    for name, pts in f1.items():
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", label=name)
    ax.set_xlabel("EPR pairs per iteration")
    ax.set_ylabel("F1 score")
    ax.set_ylim(-0.02, 1.02)
    ax2 = ax.twinx()
    first = next(iter(sends.values()), [])
    if first:
        xs, ys = zip(*first)
        ax2.plot(xs, ys, color="black", linestyle="--", label="transmissions")
    ax2.set_ylabel("total transmissions")
    ax.legend(loc="lower left", fontsize=8)
    ax.set_title(result.config.name)
    fig.tight_layout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)


def emit_outputs(result: ResultSet, out_dir=None) -> list[Path]:
    cfg = result.config
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    stem = cfg.kind.value
    written = [
        write_runs_csv(result, out / f"{stem}_runs.csv"),
        write_summary_csv(result, out / f"{stem}_summary.csv"),
    ]
    for (point, i), trace in sorted(result.traces.items()):
        written.append(write_trace_csv(trace, out / "traces" / f"point{point:04d}_seed{i:03d}.csv"))
    if cfg.plot and result.aggregates:
        if cfg.kind is Kind.CLUSTER:
            written.append(plot_cluster_sweep(result, out / f"{stem}.svg"))
        else:
            written.append(plot_link_sweep(result, out / f"{stem}.svg"))
    return written
