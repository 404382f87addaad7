import numpy as np
import pytest

from autospectral.kmeans import Partition, kmeans, kmeans_centers, lloyd_iterations
from autospectral.metrics import clustering_accuracy


def two_blobs(rng, per=30, sep=10.0, dim=3, spread=0.5):
    a = rng.standard_normal((dim, per)) * spread
    b = rng.standard_normal((dim, per)) * spread
    b[0] += sep
    X = np.hstack([a, b])
    labels = np.repeat([1, 2], per)
    return X, labels


def test_separated_blobs_exact():
    rng = np.random.default_rng(0)
    X, labels = two_blobs(rng)
    p = kmeans(X, 2, seed=1)
    truth = Partition(labels=labels, k=2)
    assert clustering_accuracy(p, truth) == 1.0


def test_k_equals_n_zero_inertia():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((2, 7))
    p = kmeans(X, 7, seed=0)
    assert p.inertia == pytest.approx(0.0, abs=1e-12)
    assert len(np.unique(p.labels)) == 7


def test_deterministic_given_seed():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((4, 40))
    p1 = kmeans(X, 3, seed=5)
    p2 = kmeans(X, 3, seed=5)
    assert np.array_equal(p1.labels, p2.labels)
    assert p1.inertia == p2.inertia


def test_inertia_history_non_increasing():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((3, 60))
    for s in range(5):
        _, _, _, history = lloyd_iterations(X.T.copy(), 4, np.random.default_rng(s))
        assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))


def test_restarts_never_worse_than_single_runs():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((2, 50))
    best = kmeans(X, 5, restarts=8, seed=9).inertia
    P = X.T.copy()
    singles = []
    for child in np.random.SeedSequence(9).spawn(8):
        _, _, inertia, _ = lloyd_iterations(P, 5, np.random.default_rng(child))
        singles.append(inertia)
    assert best <= min(singles) + 1e-12
    assert best == pytest.approx(min(singles), abs=1e-12)


def test_label_permutation_leaves_inertia_unchanged():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((3, 30))
    p = kmeans(X, 3, seed=2)
    # recompute inertia under a relabeling: centers permute with labels
    perm = np.array([3, 1, 2])
    relabeled = perm[p.labels - 1]
    inertia = 0.0
    for j in range(1, 4):
        pts = X[:, relabeled == j]
        inertia += ((pts - pts.mean(axis=1, keepdims=True)) ** 2).sum()
    reference = 0.0
    for j in range(1, 4):
        pts = X[:, p.labels == j]
        reference += ((pts - pts.mean(axis=1, keepdims=True)) ** 2).sum()
    assert inertia == pytest.approx(reference, abs=1e-12)


def test_every_cluster_nonempty():
    rng = np.random.default_rng(6)
    # many duplicated points force empty-cluster repairs
    X = np.repeat(rng.standard_normal((2, 4)), 10, axis=1)
    p = kmeans(X, 4, seed=0)
    assert len(np.unique(p.labels)) == 4


def test_k_validation():
    with pytest.raises(ValueError):
        kmeans(np.zeros((2, 3)), 4)
    with pytest.raises(ValueError):
        kmeans(np.zeros((2, 3)), 2, restarts=0)


class TestCenters:
    def test_centers_equal_points_when_k_is_n(self):
        rng = np.random.default_rng(7)
        X = rng.standard_normal((3, 6))
        centers = kmeans_centers(X, 6, seed=0)
        # centers are the points themselves, in some order
        d = ((X[:, :, None] - centers[:, None, :]) ** 2).sum(axis=0)
        assert d.min(axis=0).max() <= 1e-20

    def test_two_blob_centers_near_means(self):
        rng = np.random.default_rng(8)
        X, labels = two_blobs(rng, per=100, spread=0.4)
        centers = kmeans_centers(X, 2, seed=3)
        for j in (1, 2):
            mean = X[:, labels == j].mean(axis=1)
            dist = np.linalg.norm(centers - mean[:, None], axis=0).min()
            assert dist <= 3 * 0.4

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((2, 20))
        assert np.array_equal(kmeans_centers(X, 4, seed=11), kmeans_centers(X, 4, seed=11))


def test_partition_from_labels_contiguous():
    p = Partition.from_labels([10, 10, 3, 7])
    assert p.k == 3
    assert np.array_equal(p.labels, [3, 3, 1, 2])


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition(labels=np.array([0, 1]), k=2)
    with pytest.raises(ValueError):
        Partition(labels=np.array([1, 3]), k=2)
