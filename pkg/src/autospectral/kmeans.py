"""k-means with k-means++ seeding, restarts, and empty-cluster repair.

Points are the *columns* of the input matrix, matching the rest of the
package. Deterministic given the seed: restart streams come from spawned
seed sequences, assignment ties take the lowest center index, and empty
clusters are reseeded to the current farthest point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Partition:
    """Cluster labels 1..k plus the inertia of the producing k-means run."""

    labels: np.ndarray = field(repr=False)
    k: int
    inertia: float = 0.0

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if labels.size and (labels.min() < 1 or labels.max() > self.k):
            raise ValueError("labels must lie in 1..k")
        if self.inertia < 0:
            raise ValueError("inertia must be nonnegative")

    @property
    def n(self):
        return self.labels.size

    @classmethod
    def from_labels(cls, raw):
        """Relabel arbitrary values contiguously to 1..k (sorted value order)."""
        raw = np.asarray(raw)
        values, inverse = np.unique(raw, return_inverse=True)
        return cls(labels=inverse + 1, k=len(values))


def _sq_dists(P, centers):
    g = P @ centers.T
    pn = np.einsum("ij,ij->i", P, P)
    cn = np.einsum("ij,ij->i", centers, centers)
    return np.maximum(pn[:, None] + cn[None, :] - 2.0 * g, 0.0)


def _kmeanspp(P, k, rng):
    n = P.shape[0]
    centers = np.empty((k, P.shape[1]))
    first = int(rng.integers(0, n))
    centers[0] = P[first]
    closest = _sq_dists(P, centers[:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            # all remaining points coincide with a chosen center
            taken = {tuple(c) for c in centers[:j]}
            idx = next((i for i in range(n) if tuple(P[i]) not in taken), j % n)
        centers[j] = P[idx]
        closest = np.minimum(closest, _sq_dists(P, centers[j : j + 1])[:, 0])
    return centers


def _repair_empty(P, centers, labels, mind2, k):
    counts = np.bincount(labels, minlength=k)
    for e in np.flatnonzero(counts == 0):
        far = int(np.argmax(mind2))
        counts[labels[far]] -= 1
        centers[e] = P[far]
        labels[far] = e
        counts[e] = 1
        mind2[far] = 0.0


def lloyd_iterations(P, k, rng, max_iters=300, tol=1e-6):
    """Single k-means run; returns (labels0, centers, inertia, history).

    ``history`` collects the inertia after every assignment step and is
    non-increasing by construction of the update/repair steps.
    """
    n = P.shape[0]
    centers = _kmeanspp(P, k, rng)
    history = []
    for _ in range(max_iters):
        d2 = _sq_dists(P, centers)
        labels = np.argmin(d2, axis=1)
        mind2 = d2[np.arange(n), labels]
        _repair_empty(P, centers, labels, mind2, k)
        history.append(float(mind2.sum()))
        new_centers = centers.copy()
        for j in range(k):
            members = labels == j
            if np.any(members):
                new_centers[j] = P[members].mean(axis=0)
        shift = np.max(np.linalg.norm(new_centers - centers, axis=1))
        centers = new_centers
        if shift < tol:
            break
    d2 = _sq_dists(P, centers)
    labels = np.argmin(d2, axis=1)
    mind2 = d2[np.arange(n), labels]
    _repair_empty(P, centers, labels, mind2, k)
    history.append(float(mind2.sum()))
    return labels, centers, float(mind2.sum()), history


def kmeans(Z, k, restarts=10, max_iters=300, tol=1e-6, seed=0):
    """Best-of-``restarts`` k-means on the columns of Z.

    Returns the lowest-inertia Partition; ties keep the earliest restart.
    """
    Z = np.asarray(Z, dtype=np.float64)
    n = Z.shape[1]
    if k < 1 or k > n:
        raise ValueError(f"k must be in [1, {n}]")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    P = Z.T.copy()
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        labels, centers, inertia, _ = lloyd_iterations(P, k, rng, max_iters, tol)
        if best is None or inertia < best[0]:
            best = (inertia, labels, centers)
    inertia, labels, _ = best
    return Partition(labels=labels + 1, k=k, inertia=inertia)


def kmeans_centers(X, k, seed=0, restarts=10, max_iters=300, tol=1e-6):
    """Centers (m x k) of the best k-means run; used for landmark selection."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[1]
    if k < 1 or k > n:
        raise ValueError(f"k must be in [1, {n}]")
    P = X.T.copy()
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        _, centers, inertia, _ = lloyd_iterations(P, k, rng, max_iters, tol)
        if best is None or inertia < best[0]:
            best = (inertia, centers)
    return best[1].T.copy()
