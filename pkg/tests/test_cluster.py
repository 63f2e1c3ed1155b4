from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from gewisim.cluster import (
    ClusterConfig,
    exchange_labels,
    f1_score,
    generate_dataset,
    kmeans_iteration,
    kmeans_reference,
    run_distributed_kmeans,
    update_centroids,
)
from gewisim.qcore import PERFECT, NoiseParams

FAST = ClusterConfig(max_iters=4)


class TestF1:
    def test_identical(self):
        assert f1_score([0, 1, 1, 0], [0, 1, 1, 0]) == 1.0

    def test_hand_counted(self):
        assert f1_score([1, 1, 0, 0], [1, 0, 1, 0]) == pytest.approx(0.5)

    def test_no_true_positive(self):
        assert f1_score([0, 0, 0], [0, 0, 0]) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            f1_score([0, 1], [0, 1, 1])

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
    def test_bounds_and_reference(self, pairs):
        a, b = map(np.array, zip(*pairs))
        f = f1_score(a, b)
        assert 0.0 <= f <= 1.0
        tp = int(np.sum((a == 1) & (b == 1)))
        fp = int(np.sum((a == 0) & (b == 1)))
        fn = int(np.sum((a == 1) & (b == 0)))
        assert f == pytest.approx(2 * tp / (2 * tp + fp + fn) if tp else 0.0)
        if a.any():
            assert f1_score(a, a) == 1.0


class TestDataset:
    def test_deterministic(self):
        a, b = generate_dataset(4), generate_dataset(4)
        np.testing.assert_array_equal(a.points, b.points)
        np.testing.assert_array_equal(a.truth, b.truth)

    def test_cluster_means(self):
        d = generate_dataset(0)
        assert len(d) == 500 and np.bincount(d.truth).tolist() == [250, 250]
        np.testing.assert_allclose(d.points[d.truth == 0].mean(axis=0), [-1, 0], atol=0.05)
        np.testing.assert_allclose(d.points[d.truth == 1].mean(axis=0), [1, 0], atol=0.05)
        np.testing.assert_allclose(d.points[d.truth == 0].std(axis=0), [0.1, 0.1], atol=0.02)

    def test_zero_std(self):
        d = generate_dataset(1, std=0.0)
        np.testing.assert_array_equal(d.points, np.array([[-1.0, 0.0], [1.0, 0.0]])[d.truth])


class TestKMeans:
    def test_nearest_and_tie(self):
        pts = np.array([[-1.0, 0.0], [0.0, 0.0], [0.7, 0.1]])
        labels = kmeans_iteration(pts, np.array([[-0.5, 0.0], [0.5, 0.0]]), np.arange(3))
        assert labels.tolist() == [0, 0, 1]

    def test_index_subset(self):
        pts = np.array([[-1.0, 0.0], [1.0, 0.0], [1.2, 0.0]])
        assert kmeans_iteration(pts, np.array([[-0.5, 0], [0.5, 0]]), [2, 0]).tolist() == [1, 0]

    def test_empty_cluster_keeps_centroid(self):
        prev = np.array([[-0.5, 0.0], [9.0, 9.0]])
        out = update_centroids(np.array([[1.0, 1.0], [3.0, 1.0]]), np.array([0, 0]), prev)
        np.testing.assert_allclose(out, [[2.0, 1.0], [9.0, 9.0]])

    def test_reference_converges(self):
        d = generate_dataset(7)
        labels, centroids, iters = kmeans_reference(d.points, [(-0.5, 0), (0.5, 0)])
        assert iters <= 10
        np.testing.assert_allclose(centroids, [[-1, 0], [1, 0]], atol=0.05)
        assert f1_score(d.truth, labels) == 1.0


class TestExchange:
    labels = np.random.default_rng(0).integers(0, 2, 250)

    def test_all_plain(self):
        res = exchange_labels(self.labels, 0, PERFECT, np.random.default_rng(0))
        assert res.transmissions == 250 and res.assisted_chunks == 0
        np.testing.assert_array_equal(res.received, self.labels)

    def test_enough_perfect_pairs(self):
        for pairs in (125, 400):
            res = exchange_labels(self.labels, pairs, PERFECT, np.random.default_rng(0))
            assert res.transmissions == 125 and res.plain_bits == 0
            np.testing.assert_array_equal(res.received, self.labels)

    def test_partial_assistance(self):
        res = exchange_labels(self.labels, 40, PERFECT, np.random.default_rng(0))
        assert res.transmissions == 40 + (250 - 80)

    def test_odd_length(self):
        res = exchange_labels(self.labels[:7], 10, PERFECT, np.random.default_rng(0))
        assert res.transmissions == 4
        np.testing.assert_array_equal(res.received, self.labels[:7])

    def test_aging_schedule(self):
        res = exchange_labels(self.labels, 5, NoiseParams(1e7, 1e7), np.random.default_rng(0), 1e6, 10.0)
        assert res.pair_ages == [1e6 + 20.0 * j for j in range(5)]

    def test_fully_decohered_pairs_match_oracle(self):
        # long storage relaxes both halves to |00>: the X-driven bit survives and the
        # Z-driven bit becomes a coin flip, as the Bell probabilities of encoded |00> predict
        ground = np.outer(oracles.KET["00"], oracles.KET["00"])
        for s in range(4):
            p = oracles.bell_probs(oracles.encode(ground, s))
            assert p[oracles.OUTCOME_FOR_SYMBOL[s]] == pytest.approx(0.5)
        labels = np.random.default_rng(1).integers(0, 2, 20_000)
        res = exchange_labels(labels, 10_000, NoiseParams(11, 10), np.random.default_rng(2))
        assert res.transmissions == 10_000
        high_err = np.mean(res.received[0::2] != labels[0::2])
        low_err = np.mean(res.received[1::2] != labels[1::2])
        assert high_err == pytest.approx(0.5, abs=0.02) and low_err == 0.0

    def test_aged_chunk_error_matches_oracle(self):
        labels = np.random.default_rng(3).integers(0, 2, 40_000)
        params = NoiseParams(1e6, 1e6)
        res = exchange_labels(labels, 20_000, params, np.random.default_rng(4), processing_gap=1e6, tick_period=0.0)
        chunk_err = np.mean((res.received[0::2] != labels[0::2]) | (res.received[1::2] != labels[1::2]))
        expected = 1 - np.mean([oracles.symbol_success(1e6, 1e6, 1e6, s) for s in range(4)])
        assert chunk_err == pytest.approx(expected, abs=0.01)


class TestDistributedKMeans:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            ClusterConfig(n_points=501)
        assert ClusterConfig().channel_delay == 100.0

    def test_perfect_memory_parties_agree(self):
        res = run_distributed_kmeans(replace(FAST, pairs_per_iteration=125), 5)
        assert res.f1 == 1.0
        assert all(r.label_errors == (0, 0) and r.f1 == 1.0 for r in res.iterations)
        np.testing.assert_array_equal(res.labels[0], res.labels[1])

    def test_zero_pairs_matches_reference(self):
        cfg = replace(FAST, max_iters=10, noise=NoiseParams(11, 10))
        res = run_distributed_kmeans(cfg, 9)
        data_ss, _ = np.random.SeedSequence(9).spawn(2)
        d = generate_dataset(data_ss)
        ref, _, _ = kmeans_reference(d.points, cfg.initial_centroids, 10)
        np.testing.assert_array_equal(res.labels[0], ref)
        np.testing.assert_array_equal(res.labels[1], ref)
        assert res.total_transmissions == 10 * 2 * 250

    @settings(max_examples=8, deadline=None)
    @given(seed=st.integers(0, 2**31))
    def test_transmissions_non_increasing(self, seed):
        cfg = replace(FAST, noise=NoiseParams(1e6, 1e6))
        counts = [run_distributed_kmeans(replace(cfg, pairs_per_iteration=p), seed).total_transmissions
                  for p in (0, 30, 60, 125, 200)]
        assert counts == sorted(counts, reverse=True)

    def test_long_memory_high_f1(self):
        res = run_distributed_kmeans(replace(FAST, max_iters=10, pairs_per_iteration=125,
                                             noise=NoiseParams(1e7, 1e7)), 2)
        assert res.f1 >= 0.85

    def test_short_memory_diverges(self):
        res = run_distributed_kmeans(replace(FAST, pairs_per_iteration=125, noise=NoiseParams(1100, 1000)), 2)
        assert res.f1 < 0.9

    def test_early_stop(self):
        res = run_distributed_kmeans(replace(FAST, max_iters=10, early_stop=True), 1)
        assert len(res.iterations) < 10

    def test_deterministic(self):
        cfg = replace(FAST, pairs_per_iteration=60, noise=NoiseParams(1e6, 1e6))
        a, b = run_distributed_kmeans(cfg, 3), run_distributed_kmeans(cfg, 3)
        assert a.f1 == b.f1 and a.total_transmissions == b.total_transmissions
