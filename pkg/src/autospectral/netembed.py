"""Scalable path: regress the landmark spectral embedding with a small net.

A two-layer network (ReLU by default) is fit to map landmark features to
their spectral-embedding coordinates, then applied to the full dataset so
k-means runs in the learned k-dimensional space. Training is plain mini-batch
Adam written out explicitly; gradients are closed-form backprop and are
checked against finite differences in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import TrainingDivergedError
from .kmeans import kmeans, kmeans_centers
from .linalg import check_finite
from .search import bo_search, grid_search

ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class MLPParams:
    """Weights and biases of the two-layer embedding network."""

    w1: np.ndarray = field(repr=False)
    b1: np.ndarray = field(repr=False)
    w2: np.ndarray = field(repr=False)
    b2: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class NetConfig:
    """Training hyperparameters for the embedding network."""

    hidden: int = 200
    ridge: float = 1e-5
    epochs: int = 200
    batch_size: int = 128
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    activation: str = "relu"
    seed: int = 0

    def __post_init__(self):
        if self.hidden < 1 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("hidden, epochs, batch_size must be >= 1")
        if self.ridge < 0 or self.lr <= 0:
            raise ValueError("ridge must be >= 0 and lr > 0")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")


class GradBlocks(NamedTuple):
    """Gradient with one array per parameter block (not validated: a diverged
    step legitimately produces non-finite values that training turns into a
    TrainingDivergedError)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray


def _act(A, kind):
    if kind == "relu":
        return np.maximum(A, 0.0)
    return np.tanh(A)


def _act_grad(A, kind):
    if kind == "relu":
        return (A > 0.0).astype(np.float64)  # subgradient 0 at the kink
    t = np.tanh(A)
    return 1.0 - t * t


def net_forward(params, X, activation="relu"):
    """W2 act(W1 X + b1 1') + b2 1': the learned embedding of the columns of X."""
    A = params.w1 @ X + params.b1[:, None]
    return params.w2 @ _act(A, activation) + params.b2[:, None]


def net_loss_and_grad(params, X, Z, ridge, activation="relu"):
    """Ridge-regularized least-squares loss and its exact gradient.

    loss = ||Z - net(X)||_F^2 / (2 s) + ridge/2 (||W1||_F^2 + ||W2||_F^2)
    with s the number of columns.
    """
    s = X.shape[1]
    with np.errstate(over="ignore", invalid="ignore"):
        A = params.w1 @ X + params.b1[:, None]
        H = _act(A, activation)
        R = params.w2 @ H + params.b2[:, None] - Z
        loss = float(np.sum(R * R)) / (2.0 * s) + 0.5 * ridge * (
            float(np.sum(params.w1**2)) + float(np.sum(params.w2**2))
        )
        dw2 = (R @ H.T) / s + ridge * params.w2
        db2 = R.sum(axis=1) / s
        dA = (params.w2.T @ R) * _act_grad(A, activation)
        dw1 = (dA @ X.T) / s + ridge * params.w1
        db1 = dA.sum(axis=1) / s
    return loss, GradBlocks(w1=dw1, b1=db1, w2=dw2, b2=db2)


def net_train(X, Z, config):
    """Mini-batch Adam on the embedding-regression loss.

    He-scaled Gaussian init for the weights, zero biases; batches reshuffled
    every epoch; deterministic given ``config.seed``. Returns the trained
    parameters and the full-batch loss trace (initial loss plus one value per
    epoch).

    Raises
    ------
    TrainingDivergedError
        On a non-finite full-batch loss, carrying the epoch index.
    """
    X = check_finite(X, "X")
    Z = check_finite(Z, "Z")
    m, s = X.shape
    kdim = Z.shape[0]
    if Z.shape[1] != s:
        raise ValueError("X and Z must have the same number of columns")
    if config.batch_size > s:
        raise ValueError("batch_size exceeds the number of training columns")
    rng = np.random.default_rng(config.seed)
    d = config.hidden
    params = MLPParams(
        w1=rng.standard_normal((d, m)) * np.sqrt(2.0 / m),
        b1=np.zeros(d),
        w2=rng.standard_normal((kdim, d)) * np.sqrt(2.0 / d),
        b2=np.zeros(kdim),
    )
    mom = {name: np.zeros_like(getattr(params, name)) for name in ("w1", "b1", "w2", "b2")}
    vel = {name: np.zeros_like(getattr(params, name)) for name in ("w1", "b1", "w2", "b2")}
    t = 0

    def full_loss():
        loss, _ = net_loss_and_grad(params, X, Z, config.ridge, config.activation)
        return loss

    losses = [full_loss()]
    if not np.isfinite(losses[0]):
        raise TrainingDivergedError("non-finite loss before training", epoch=0)
    for epoch in range(config.epochs):
        order = rng.permutation(s)
        for start in range(0, s, config.batch_size):
            idx = order[start : start + config.batch_size]
            _, grads = net_loss_and_grad(
                params, X[:, idx], Z[:, idx], config.ridge, config.activation
            )
            t += 1
            updated = {}
            with np.errstate(over="ignore", invalid="ignore"):
                for name in ("w1", "b1", "w2", "b2"):
                    g = getattr(grads, name)
                    mom[name] = config.beta1 * mom[name] + (1.0 - config.beta1) * g
                    vel[name] = config.beta2 * vel[name] + (1.0 - config.beta2) * g * g
                    mhat = mom[name] / (1.0 - config.beta1**t)
                    vhat = vel[name] / (1.0 - config.beta2**t)
                    updated[name] = getattr(params, name) - config.lr * mhat / (
                        np.sqrt(vhat) + config.eps_adam
                    )
            try:
                params = MLPParams(**updated)
            except ValueError as exc:
                raise TrainingDivergedError(
                    f"non-finite parameters at epoch {epoch}", epoch=epoch
                ) from exc
        loss = full_loss()
        if not np.isfinite(loss):
            raise TrainingDivergedError(f"non-finite loss at epoch {epoch}", epoch=epoch)
        losses.append(loss)
    return params, np.asarray(losses)


def landmark_cluster(
    X,
    k,
    space,
    n_landmarks,
    net_config,
    seed=0,
    mode="grid",
    budget_per_model=30,
    eps=1e-6,
    score="reg",
    threads=1,
):
    """Landmark search + learned embedding for datasets too large to search directly.

    k-means centers stand in as landmarks (re-normalized to unit columns,
    which the search pipeline expects); the candidate search runs on the
    landmarks; the network learns landmark -> embedding and is applied to all
    of X; k-means on the result gives the final partition.

    Returns
    -------
    (Partition, SearchResult)
    """
    X = check_finite(X, "X")
    n = X.shape[1]
    if not (k + 1 <= n_landmarks < n):
        raise ValueError(f"need k + 1 <= n_landmarks < n (got {n_landmarks}, n={n})")
    centers = kmeans_centers(X, n_landmarks, seed=seed)
    norms = np.linalg.norm(centers, axis=0)
    norms[norms == 0] = 1.0
    landmarks = centers / norms
    if mode == "grid":
        result = grid_search(X=landmarks, k=k, space=space, eps=eps, seed=seed, score=score, threads=threads)
    elif mode == "bo":
        result = bo_search(
            X=landmarks, k=k, space=space, budget_per_model=budget_per_model,
            seed=seed, eps=eps, score=score, threads=threads,
        )
    else:
        raise ValueError("mode must be 'grid' or 'bo'")
    params, _ = net_train(landmarks, result.embedding, net_config)
    Z = net_forward(params, X, net_config.activation)
    partition = kmeans(Z, k, seed=seed)
    return partition, result
