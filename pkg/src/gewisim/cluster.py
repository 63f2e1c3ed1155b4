"""Two-party distributed k-means with label exchange over buffered entanglement.

Both parties hold the full dataset and the same initial centroids. Each
iteration a party labels its half of the points, sends those labels to the
other party (superdense-coded while stored pairs last, plain bits after
that), and recomputes centroids from its own, possibly corrupted, view of
all labels. The halves swap every iteration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qcore import DECODE, PERFECT, NoiseParams, aged_decode_table, sample_cdf

__all__ = [
    "Dataset",
    "ClusterConfig",
    "ExchangeResult",
    "ClusterResult",
    "generate_dataset",
    "kmeans_iteration",
    "update_centroids",
    "kmeans_reference",
    "exchange_labels",
    "run_distributed_kmeans",
    "f1_score",
]


@dataclass(frozen=True)
class Dataset:
    points: np.ndarray   # (n, 2)
    truth: np.ndarray    # (n,) ground-truth cluster index

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ClusterConfig:
    """Times in ns. ``pairs_per_iteration`` is the pairs stored per direction per iteration."""

    n_points: int = 500
    centers: tuple = ((-1.0, 0.0), (1.0, 0.0))
    std: float = 0.1
    initial_centroids: tuple = ((-0.5, 0.0), (0.5, 0.0))
    max_iters: int = 10
    pairs_per_iteration: int = 0
    memory_capacity: int = 500
    noise: NoiseParams = PERFECT
    processing_gap: float = 1e6
    tick_period: float = 10.0
    channel_length_m: float = 20.0
    early_stop: bool = False
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.n_points < 2 or self.n_points % 2:
            raise ValueError(f"n_points must be a positive even number, got {self.n_points}")
        if len(self.centers) != 2 or len(self.initial_centroids) != 2:
            raise ValueError("binary clustering needs exactly two centers and two initial centroids")
        if self.std < 0:
            raise ValueError("std must be non-negative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.pairs_per_iteration < 0 or self.memory_capacity < 0:
            raise ValueError("pair counts must be non-negative")
        if self.processing_gap < 0 or self.tick_period <= 0:
            raise ValueError("processing_gap must be >= 0 and tick_period > 0")

    @property
    def channel_delay(self) -> float:
        # 5 us per km of fiber
        return self.channel_length_m * 5.0

    @property
    def pairs_available(self) -> int:
        return min(self.pairs_per_iteration, self.memory_capacity)


def generate_dataset(seed, n_points: int = 500, centers=((-1.0, 0.0), (1.0, 0.0)), std: float = 0.1) -> Dataset:
    """Two Gaussian blobs of ``n_points // 2`` points each, shuffled."""
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, dtype=float)
    truth = np.repeat(np.arange(len(centers)), n_points // len(centers))
    points = centers[truth] + std * rng.standard_normal((len(truth), centers.shape[1]))
    order = rng.permutation(len(truth))
    return Dataset(points[order], truth[order])


def kmeans_iteration(points: np.ndarray, centroids: np.ndarray, index_set) -> np.ndarray:
    """Nearest-centroid labels for ``points[index_set]``; ties go to the lower index."""
    pts = points[index_set]
    d2 = ((pts[:, None, :] - np.asarray(centroids)[None, :, :]) ** 2).sum(axis=-1)
    return d2.argmin(axis=1)


def update_centroids(points: np.ndarray, labels: np.ndarray, previous: np.ndarray) -> np.ndarray:
    out = np.array(previous, dtype=float, copy=True)
    for k in range(len(out)):
        members = points[labels == k]
        if len(members):
            out[k] = members.mean(axis=0)
    return out


def kmeans_reference(points, centroids, max_iters: int = 10):
    """Single-node Lloyd iterations over all points; returns (labels, centroids, iterations)."""
    c = np.asarray(centroids, dtype=float)
    everything = np.arange(len(points))
    for it in range(1, max_iters + 1):
        labels = kmeans_iteration(points, c, everything)
        new = update_centroids(points, labels, c)
        if np.array_equal(new, c):
            return labels, new, it
        c = new
    return labels, c, max_iters


@dataclass
class ExchangeResult:
    received: np.ndarray
    transmissions: int
    assisted_chunks: int
    plain_bits: int
    pair_ages: list = field(default_factory=list)


def exchange_labels(
    labels,
    pairs_available: int,
    noise: NoiseParams,
    rng: np.random.Generator,
    processing_gap: float = 1e6,
    tick_period: float = 10.0,
) -> ExchangeResult:
    """Send a label bit-string, two bits per stored pair while pairs last, then one bit per qubit.

    Pairs are consumed newest first. Pair ``k`` (0 = newest) was generated
    ``processing_gap + k * tick_period`` before the exchange starts, and chunk
    ``j`` goes out ``j * tick_period`` after the start, so the ``j``-th chunk's
    pair has aged ``processing_gap + 2 * j * tick_period`` on both halves.
    """
    bits = np.asarray(labels, dtype=np.int64)
    n = len(bits)
    n_chunks = math.ceil(n / 2)
    assisted = min(pairs_available, n_chunks)
    received = bits.copy()
    ages = []
    for j in range(assisted):
        b0 = int(bits[2 * j])
        b1 = int(bits[2 * j + 1]) if 2 * j + 1 < n else 0
        age = processing_gap + 2 * j * tick_period
        row = aged_decode_table(age, noise)[2 * b0 + b1]
        sym = int(DECODE[sample_cdf(row, rng.random())])
        received[2 * j] = sym >> 1
        if 2 * j + 1 < n:
            received[2 * j + 1] = sym & 1
        ages.append(age)
    plain = max(n - 2 * assisted, 0)
    return ExchangeResult(received, assisted + plain, assisted, plain, ages)


def f1_score(reference, prediction) -> float:
    """F1 of ``prediction`` against ``reference`` with label 1 as the positive class.

    Returns 0.0 when there are no true positives.
    """
    a = np.asarray(reference).astype(bool)
    b = np.asarray(prediction).astype(bool)
    if a.shape != b.shape or a.size == 0:
        raise ValueError("label vectors must be non-empty and of equal length")
    tp = int(np.sum(a & b))
    if tp == 0:
        return 0.0
    precision = tp / int(np.sum(b))
    recall = tp / int(np.sum(a))
    return 2 * precision * recall / (precision + recall)


@dataclass
class IterationRecord:
    iteration: int
    transmissions: int
    assisted_chunks: int
    label_errors: tuple     # wrong bits received by (party 0, party 1)
    f1: float
    centroids: tuple        # (party 0, party 1), each (2, 2)


@dataclass
class ClusterResult:
    config: ClusterConfig
    total_transmissions: int
    f1: float
    labels: tuple           # final full label views of party 0 and party 1
    iterations: list


def run_distributed_kmeans(config: ClusterConfig, seed) -> ClusterResult:
    cfg = config
    data_ss, link_ss = np.random.SeedSequence(seed).spawn(2)
    data = generate_dataset(data_ss, cfg.n_points, cfg.centers, cfg.std)
    rngs = [np.random.default_rng(s) for s in link_ss.spawn(2)]  # 0->1 and 1->0 channels
    pts = data.points
    half = cfg.n_points // 2
    index_sets = [np.arange(half), np.arange(half, cfg.n_points)]

    centroids = [np.array(cfg.initial_centroids, dtype=float) for _ in range(2)]
    views = [np.zeros(cfg.n_points, dtype=np.int64) for _ in range(2)]
    total = 0
    trace = []
    for it in range(cfg.max_iters):
        mine = [index_sets[(p + it) % 2] for p in range(2)]
        own = [kmeans_iteration(pts, centroids[p], mine[p]) for p in range(2)]
        sent = [
            exchange_labels(own[p], cfg.pairs_available, cfg.noise, rngs[p],
                            cfg.processing_gap, cfg.tick_period)
            for p in range(2)
        ]
        errors = []
        for p in range(2):
            other = 1 - p
            views[p][mine[p]] = own[p]
            views[p][mine[other]] = sent[other].received
            errors.append(int(np.sum(sent[other].received != own[other])))
        step = sum(s.transmissions for s in sent)
        total += step
        previous = [c.copy() for c in centroids]
        centroids = [update_centroids(pts, views[p], centroids[p]) for p in range(2)]
        trace.append(
            IterationRecord(
                it,
                step,
                sum(s.assisted_chunks for s in sent),
                tuple(errors),
                f1_score(views[0], views[1]),
                (centroids[0].copy(), centroids[1].copy()),
            )
        )
        if cfg.early_stop and all(
            np.max(np.abs(centroids[p] - previous[p])) < cfg.tolerance for p in range(2)
        ):
            break
    return ClusterResult(cfg, total, f1_score(views[0], views[1]), (views[0].copy(), views[1].copy()), trace)
