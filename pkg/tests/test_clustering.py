import itertools

import numpy as np
import pytest

from msdenoise.clustering import (
    LabelSet,
    _affinity,
    _kmeans_once,
    _rng,
    ari,
    hierarchical,
    kmeans,
    spectral,
)


def two_blobs(n_per=50, gap=10.0, seed=0):
    rng = np.random.default_rng(seed)
    pts = np.vstack([
        rng.normal(0.0, 0.3, (n_per, 2)),
        rng.normal(gap, 0.3, (n_per, 2)),
    ])
    return pts, np.repeat([0, 1], n_per)


def ari_pair_counting(a, b):
    """Brute-force oracle: enumerate all point pairs, apply the adjusted formula."""
    n = len(a)
    n11 = n10 = n01 = 0
    for i, j in itertools.combinations(range(n), 2):
        sa, sb = a[i] == a[j], b[i] == b[j]
        n11 += sa and sb
        n10 += sa and not sb
        n01 += sb and not sa
    total = n * (n - 1) / 2
    expected = (n11 + n10) * (n11 + n01) / total
    max_index = 0.5 * ((n11 + n10) + (n11 + n01))
    if max_index == expected:
        return None
    return (n11 - expected) / (max_index - expected)


class TestLabelSet:
    def test_validation(self):
        with pytest.raises(ValueError):
            LabelSet([0, 1, 2], 2)
        with pytest.raises(ValueError):
            LabelSet([0, -1], 2)
        with pytest.raises(ValueError):
            LabelSet([[0, 1]], 2)
        ls = LabelSet([1, 0, 1], 2)
        assert len(ls) == 3
        assert not ls.labels.flags.writeable


class TestKMeans:
    def test_two_blobs_perfect(self):
        pts, truth = two_blobs()
        assert ari(kmeans(pts, 2, rng_seed=0), truth) == 1.0

    def test_k_one(self):
        pts, _ = two_blobs(10)
        assert set(kmeans(pts, 1).labels.tolist()) == {0}

    def test_k_equals_n_singletons(self):
        pts = np.random.default_rng(0).normal(size=(12, 2))
        labels, wcss, _ = _kmeans_once(pts, 12, _rng(0, 0))
        assert len(set(labels.tolist())) == 12
        assert wcss == 0.0

    def test_objective_never_increases(self):
        pts = np.random.default_rng(1).normal(size=(300, 3))
        for r in range(5):
            _, _, history = _kmeans_once(pts, 7, _rng(3, r))
            assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))

    def test_duplicate_points_terminate(self):
        # all-duplicate data exercises the empty-cluster re-seeding branch
        pts = np.repeat([[0.0], [1.0]], 5, axis=0)
        labels, wcss, _ = _kmeans_once(pts, 3, _rng(0, 0))
        assert wcss == 0.0
        assert labels.min() >= 0 and labels.max() < 3

    def test_deterministic(self):
        pts, _ = two_blobs(30, gap=2.0, seed=3)
        a = kmeans(pts, 3, rng_seed=5)
        b = kmeans(pts, 3, rng_seed=5)
        assert np.array_equal(a.labels, b.labels)

    def test_validation(self):
        pts, _ = two_blobs(5)
        with pytest.raises(ValueError):
            kmeans(pts, 11)
        with pytest.raises(ValueError):
            kmeans(pts, 0)
        with pytest.raises(ValueError):
            kmeans(pts, 2, restarts=0)


def concentric_rings(n_ring=120):
    def ring(radius, seed):
        ang = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, n_ring)
        return radius * np.c_[np.cos(ang), np.sin(ang)]

    pts = np.vstack([ring(1.0, 1), ring(5.0, 2)])
    pts += np.random.default_rng(3).normal(0.0, 0.05, pts.shape)
    return pts, np.repeat([0, 1], n_ring)


class TestSpectral:
    def test_rings_small_sigma(self):
        pts, truth = concentric_rings()
        assert ari(spectral(pts, 2, affinity_sigma=0.5, rng_seed=0), truth) == 1.0

    def test_rings_knn_graph(self):
        pts, truth = concentric_rings()
        assert ari(spectral(pts, 2, knn=10, rng_seed=0), truth) == 1.0

    def test_k_one(self):
        pts, _ = two_blobs(10)
        ls = spectral(pts, 1)
        assert set(ls.labels.tolist()) == {0} and ls.k == 1

    def test_duplication_invariance(self):
        rng = np.random.default_rng(4)
        small = np.vstack([rng.normal(0.0, 0.2, (5, 2)), rng.normal(4.0, 0.2, (5, 2))])
        base = spectral(small, 2, affinity_sigma=1.0, rng_seed=0)
        doubled = spectral(np.vstack([small, small]), 2, affinity_sigma=1.0, rng_seed=0)
        assert ari(np.tile(base.labels, 2), doubled) == 1.0

    def test_duplication_affinity_block_structure(self):
        small = np.random.default_rng(4).normal(size=(10, 2))
        a = _affinity(small, 1.0)
        doubled = _affinity(np.vstack([small, small]), 1.0)
        # copies sit at distance zero: affinity 1 off the true diagonal
        expect = np.block([[a, a + np.eye(10)], [a + np.eye(10), a]])
        assert np.array_equal(doubled, expect)

    def test_disconnected_graph_warns(self):
        rng = np.random.default_rng(0)
        pts = np.vstack([rng.normal(c, 0.01, (5, 2)) for c in (0.0, 100.0, 200.0)])
        with pytest.warns(UserWarning, match="connected components"):
            spectral(pts, 2, affinity_sigma=0.05, rng_seed=0)

    def test_validation(self):
        pts = np.random.default_rng(0).normal(size=(4, 2))
        with pytest.raises(ValueError):
            spectral(pts, 5)
        with pytest.raises(ValueError):
            spectral(pts[:2], 2)
        with pytest.raises(ValueError):
            spectral(pts, 2, affinity_sigma=-1.0)
        with pytest.raises(ValueError):
            spectral(pts, 2, knn=4)


class TestHierarchical:
    def test_five_point_single_linkage(self):
        x = np.array([0.0, 0.1, 0.2, 10.0, 10.1])[:, None]
        labels = hierarchical(x, 2, linkage="single").labels
        assert labels[0] == labels[1] == labels[2]
        assert labels[3] == labels[4]
        assert labels[0] != labels[3]

    @pytest.mark.parametrize("method", ["single", "complete", "average", "ward"])
    def test_two_blobs_any_linkage(self, method):
        pts, truth = two_blobs()
        assert ari(hierarchical(pts, 2, linkage=method), truth) == 1.0

    def test_k_equals_n(self):
        pts = np.random.default_rng(2).normal(size=(8, 2))
        assert len(set(hierarchical(pts, 8).labels.tolist())) == 8

    def test_validation(self):
        pts = np.random.default_rng(0).normal(size=(5, 2))
        with pytest.raises(ValueError):
            hierarchical(pts, 2, linkage="median")
        with pytest.raises(ValueError):
            hierarchical(pts, 6)


class TestARI:
    def test_hand_case(self):
        got = ari([0, 0, 1, 1], [0, 1, 1, 1])
        assert got == ari_pair_counting([0, 0, 1, 1], [0, 1, 1, 1])
        assert got == 0.0

    def test_identity_and_relabeling(self):
        a = [0, 0, 1, 2, 2, 1]
        assert ari(a, a) == 1.0
        assert ari(a, [2, 2, 0, 1, 1, 0]) == 1.0

    def test_symmetry_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = rng.integers(0, 3, 9)
            b = rng.integers(0, 4, 9)
            assert ari(a, b) == ari(b, a)

    def test_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 30:
            a = rng.integers(0, 3, 8)
            b = rng.integers(0, 3, 8)
            want = ari_pair_counting(a.tolist(), b.tolist())
            if want is None:
                continue
            assert ari(a, b) == pytest.approx(want, abs=1e-12)
            checked += 1

    def test_degenerate_denominator(self):
        assert ari([0, 1, 2], [2, 0, 1]) == 1.0  # both all-singletons
        assert ari([0, 0, 0], [1, 1, 1]) == 1.0  # both one block
        assert ari([0, 1, 2], [0, 0, 0]) == 0.0  # formula path, zero index

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ari([0, 1], [0, 1, 1])
