"""Coefficient-matrix construction and affinity post-processing.

A candidate affinity is built in two stages: a dense coefficient matrix C
from the data (ridge self-expression, its kernel variant, or a direct kernel
similarity), then a sparsifying post-process (abs + zero diagonal, per-column
truncation to the tau largest entries, column l1 normalization, and
symmetrization) that yields the graph handed to the spectral stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateCandidateError, DegenerateDataError, NumericalError
from .linalg import check_finite, randomized_svd, solve_spd

MODEL_LSR = "lsr"
MODEL_KLSR = "klsr"
MODEL_KERNEL_DIRECT = "kernel_direct"
MODELS = (MODEL_LSR, MODEL_KLSR, MODEL_KERNEL_DIRECT)

KERNEL_KINDS = ("linear", "gaussian", "polynomial")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and hyperparameters.

    For the gaussian kernel the bandwidth is ``xi`` times the mean pairwise
    distance of the data; ``offset`` and ``degree`` are the polynomial
    kernel's (x'y + offset)**degree parameters.
    """

    kind: str = "gaussian"
    xi: float = 1.0
    offset: float = 0.0
    degree: int = 1

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        if self.offset < 0:
            raise ValueError("offset must be nonnegative")
        if self.degree < 1:
            raise ValueError("degree must be >= 1")


@dataclass(frozen=True)
class CandidateConfig:
    """One point of the search space: model, its hyperparameters, truncation level."""

    model: str
    tau: int
    lam: float = 0.1
    kernel: KernelSpec | None = None
    approx_rank: int | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if self.model in (MODEL_LSR, MODEL_KLSR) and self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.model in (MODEL_KLSR, MODEL_KERNEL_DIRECT) and self.kernel is None:
            raise ValueError(f"model {self.model!r} requires a kernel spec")
        if self.approx_rank is not None and self.approx_rank < 1:
            raise ValueError("approx_rank must be >= 1")


@dataclass(frozen=True)
class AffinityGraph:
    """Sparse symmetric nonnegative affinity with zero diagonal, plus degrees."""

    a: sp.csr_matrix
    degrees: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.a.shape[0]


def gaussian_bandwidth(X, xi=1.0, max_exact_n=20000, sample_pairs=1_000_000, seed=0):
    """Bandwidth = xi * mean pairwise distance over all n^2 ordered pairs.

    Beyond ``max_exact_n`` points the mean is estimated from uniformly
    sampled pairs instead of the exact n^2 sum.

    Returns
    -------
    (sigma, estimated) : float, bool
    """
    X = check_finite(X, "X")
    n = X.shape[1]
    if n < 2:
        raise ValueError("need at least two points")
    if n <= max_exact_n:
        sq = _pairwise_sq_dists(X, X)
        mean = np.sqrt(np.maximum(sq, 0.0)).sum() / (n * n)
        return xi * mean, False
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, size=sample_pairs)
    j = rng.integers(0, n, size=sample_pairs)
    d = np.linalg.norm(X[:, i] - X[:, j], axis=0)
    return xi * float(d.mean()), True


def _pairwise_sq_dists(X, Y):
    g = X.T @ Y
    nx = np.einsum("ij,ij->j", X, X)
    ny = np.einsum("ij,ij->j", Y, Y)
    return np.maximum(nx[:, None] + ny[None, :] - 2.0 * g, 0.0)


def kernel_matrix(X, spec):
    """Dense n x n kernel Gram matrix for the columns of X.

    The gaussian diagonal is exactly 1; the result is exactly symmetric.

    Raises
    ------
    DegenerateDataError
        If the gaussian bandwidth evaluates to zero (all points identical).
    """
    X = check_finite(X, "X")
    n = X.shape[1]
    if n < 2:
        raise ValueError("need at least two points")
    if spec.kind == "linear":
        K = X.T @ X
    elif spec.kind == "polynomial":
        K = (X.T @ X + spec.offset) ** spec.degree
    else:
        sigma, _ = gaussian_bandwidth(X, spec.xi)
        if sigma <= 0.0:
            raise DegenerateDataError("gaussian bandwidth is zero: all points identical")
        K = np.exp(-_pairwise_sq_dists(X, X) / (2.0 * sigma**2))
    return (K + K.T) / 2.0


def lsr_coefficients(X, lam):
    """Closed-form ridge self-expression coefficients.

    Solves min_C 0.5 ||X - X C||_F^2 + 0.5 lam ||C||_F^2. The n x n normal
    equations form is used when m >= n; otherwise the equivalent m x m dual
    form (push-through identity) is solved, which is cheaper when m < n.
    """
    X = check_finite(X, "X")
    if lam <= 0:
        raise ValueError("lam must be positive")
    m, n = X.shape
    if m < n:
        W = solve_spd(lam * np.eye(m) + X @ X.T, X)
        return X.T @ W
    G = X.T @ X
    return solve_spd(G + lam * np.eye(n), G)


def klsr_coefficients(K, lam, approx_rank=None, seed=0):
    """Kernel ridge self-expression coefficients C = (K + lam I)^-1 K.

    K is symmetrized before solving. With ``approx_rank`` r, a randomized
    rank-r factorization K ~ V S V' gives the low-rank form
    C ~ V diag(s / (lam + s)) V' instead of the exact solve.

    Raises
    ------
    NumericalError
        If K is indefinite beyond a 1e-8 tolerance (relative to its scale).
    """
    K = check_finite(K, "K")
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("K must be square")
    if lam <= 0:
        raise ValueError("lam must be positive")
    n = K.shape[0]
    Ks = (K + K.T) / 2.0
    scale = max(np.max(np.abs(Ks)), 1.0)
    if np.min(np.diagonal(Ks)) < -1e-8 * scale:
        raise NumericalError("kernel matrix is indefinite (negative diagonal)")
    if approx_rank is None:
        try:
            np.linalg.cholesky(Ks + (1e-8 * scale) * np.eye(n))
        except np.linalg.LinAlgError as exc:
            raise NumericalError("kernel matrix is indefinite beyond tolerance") from exc
        return solve_spd(Ks + lam * np.eye(n), Ks)
    r = min(approx_rank, n)
    f = randomized_svd(Ks, r, oversample=min(10, n - r), seed=seed)
    rayleigh = np.einsum("ij,ij->j", f.V, Ks @ f.V)
    if np.min(rayleigh) < -1e-8 * scale:
        raise NumericalError("kernel matrix is indefinite beyond tolerance")
    return (f.V * (f.s / (lam + f.s))) @ f.V.T


def build_coefficients(X, config, seed=0):
    """Dispatch to the configured coefficient model. Independent of tau."""
    if config.model == MODEL_LSR:
        return lsr_coefficients(X, config.lam)
    K = kernel_matrix(X, config.kernel)
    if config.model == MODEL_KERNEL_DIRECT:
        return K
    return klsr_coefficients(K, config.lam, approx_rank=config.approx_rank, seed=seed)


def postprocess_affinity(C, tau):
    """Sparsify a coefficient matrix into an affinity graph.

    In order: absolute value with zeroed diagonal, per-column truncation to
    the tau largest entries (ties broken by lowest row index), column l1
    normalization, symmetrization A = (C + C')/2. The input C is left
    untouched so one C can be reused across a grid of tau values.

    Raises
    ------
    DegenerateCandidateError
        If any column is entirely zero after abs/zero-diagonal, or any vertex
        of the symmetrized graph has zero degree.
    """
    C = check_finite(C, "C")
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("C must be square")
    if tau < 1:
        raise ValueError("tau must be >= 1")
    n = C.shape[0]
    W = np.abs(C)
    np.fill_diagonal(W, 0.0)
    if np.any(W.sum(axis=0) == 0.0):
        raise DegenerateCandidateError("a column has no off-diagonal mass")
    if tau < n - 1:
        # stable argsort on -W: equal values keep ascending row order
        order = np.argsort(-W, axis=0, kind="stable")
        keep = np.zeros_like(W, dtype=bool)
        np.put_along_axis(keep, order[:tau, :], True, axis=0)
        W = np.where(keep, W, 0.0)
        if np.any(W.sum(axis=0) == 0.0):
            raise DegenerateCandidateError("a column is all-zero after truncation")
    W = W / W.sum(axis=0, keepdims=True)
    A = (W + W.T) / 2.0
    degrees = A.sum(axis=1)
    if np.any(degrees <= 0.0):
        raise DegenerateCandidateError("graph has an isolated vertex")
    return AffinityGraph(sp.csr_matrix(A), degrees)


def default_approx_rank(n, k, threshold=5000):
    """Low-rank shortcut kicks in for large n; rank 20k works well in practice."""
    return 20 * k if n > threshold else None
