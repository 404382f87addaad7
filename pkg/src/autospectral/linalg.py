"""Dense and sparse numerical kernels shared by the rest of the package.

Three workhorses live here: a randomized truncated SVD (range finder with
power iterations), a partial symmetric eigensolver (block Lanczos with full
reorthogonalization and random deflation, so repeated eigenvalues of graph
operators are recovered with their multiplicities), and an SPD solve backed
by a Cholesky factorization with one step of iterative refinement.

All routines work in float64, are pure functions of their inputs, and are
deterministic given their seed.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import EigsolverError, NumericalError


class SvdFactors(NamedTuple):
    """Truncated SVD ``M ~ U @ diag(s) @ V.T`` with s sorted descending."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray


def check_finite(M, name="matrix"):
    """Reject NaN/Inf entries up front; returns the array as float64."""
    M = np.asarray(M, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def sym_from_triplets(dim, rows, cols, values):
    """Build an exactly-symmetric sparse CSR matrix from (i, j, value) triplets.

    Each triplet is stored canonically (min(i,j), max(i,j)) and mirrored, so
    the result satisfies ``M.T == M`` at the storage level. Duplicate triplets
    are summed.
    """
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    values = check_finite(values, "values").ravel()
    if rows.shape != cols.shape or rows.shape != values.shape:
        raise ValueError("rows, cols, values must have equal length")
    if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= dim or cols.max() >= dim):
        raise ValueError("triplet index out of range")
    lo = np.minimum(rows, cols)
    hi = np.maximum(rows, cols)
    # sum duplicates ourselves: scipy's per-cell accumulation order is not
    # reproducible across mirrored cells, which would break exact symmetry
    keys = lo * dim + hi
    uniq, inverse = np.unique(keys, return_inverse=True)
    summed = np.bincount(inverse, weights=values, minlength=len(uniq))
    ulo, uhi = uniq // dim, uniq % dim
    off = ulo != uhi
    r = np.concatenate([ulo, uhi[off]])
    c = np.concatenate([uhi, ulo[off]])
    v = np.concatenate([summed, summed[off]])
    return sp.coo_matrix((v, (r, c)), shape=(dim, dim)).tocsr()


def randomized_svd(M, rank, oversample=10, power_iters=2, seed=0):
    """Rank-``rank`` randomized SVD of a dense (or sparse) matrix.

    Gaussian test matrix, QR range finder, ``power_iters`` power iterations
    with re-orthonormalization between products. Deterministic given ``seed``.

    Parameters
    ----------
    M : (m, n) array_like
    rank : int
        Number of singular triplets to return; requires
        ``rank + oversample <= min(m, n)``.
    oversample : int
        Extra columns carried by the range finder.
    power_iters : int
        Power iterations; improves accuracy for slowly decaying spectra.
    seed : int

    Returns
    -------
    SvdFactors
        ``U`` (m, rank), ``s`` (rank,) descending, ``V`` (n, rank).
    """
    dense = not sp.issparse(M)
    if dense:
        M = check_finite(M, "M")
    m, n = M.shape
    if rank < 1:
        raise ValueError("rank must be >= 1")
    if oversample < 0 or power_iters < 0:
        raise ValueError("oversample and power_iters must be >= 0")
    ell = rank + oversample
    if ell > min(m, n):
        raise ValueError(f"rank + oversample = {ell} exceeds min(m, n) = {min(m, n)}")

    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((n, ell))
    Q, _ = np.linalg.qr(M @ omega)
    for _ in range(power_iters):
        Q, _ = np.linalg.qr(M.T @ Q)
        Q, _ = np.linalg.qr(M @ Q)
    B = Q.T @ M
    Ub, s, Vt = np.linalg.svd(np.asarray(B), full_matrices=False)
    U = Q @ Ub[:, :rank]
    return SvdFactors(U, s[:rank], Vt[:rank].T)


def _orthonormal_block(Y, Q, rng, floor):
    """Orthonormalize the columns of Y against Q (and each other).

    Fast path: block projection twice plus one QR. Columns that collapse
    below ``floor`` fall back to a column-by-column pass where dead
    directions are replaced with fresh random vectors: this is the
    deflation/restart that lets the Lanczos iteration pick up further copies
    of repeated eigenvalues once an invariant subspace has been exhausted.
    """
    n, b = Y.shape
    V = Y.copy()
    scale = max(np.max(np.abs(Y)), 1.0)
    if Q is not None and Q.shape[1]:
        for _ in range(2):
            V -= Q @ (Q.T @ V)
    Qb, R = np.linalg.qr(V)
    if np.min(np.abs(np.diagonal(R))) > floor * scale * n:
        return Qb

    out = np.empty((n, b))
    got = 0
    cand = [Y[:, j] for j in range(b)]
    attempts = 0
    while got < b:
        v = cand.pop(0) if cand else rng.standard_normal(n)
        for _ in range(2):
            if Q is not None and Q.shape[1]:
                v = v - Q @ (Q.T @ v)
            if got:
                v = v - out[:, :got] @ (out[:, :got].T @ v)
        nv = np.linalg.norm(v)
        if nv > floor * scale:
            out[:, got] = v / nv
            got += 1
        attempts += 1
        if attempts > 20 * b + 100:
            raise NumericalError("failed to extend orthonormal basis")
    return out


def partial_sym_eigs(M, count, seed=0, tol=1e-10, max_steps=None):
    """Largest ``count`` eigenvalues and eigenvectors of a symmetric matrix.

    Block Lanczos (block size = ``count``) with full reorthogonalization.
    The Rayleigh-Ritz projection is formed over the accumulated Krylov basis;
    when a block goes rank deficient the missing directions are replaced by
    random vectors orthogonal to the basis, so eigenvalue multiplicities up
    to ``count`` are found reliably (graph operators with several connected
    components exercise exactly this). If the basis exhausts the full space
    the decomposition is exact.

    Parameters
    ----------
    M : (n, n) symmetric ndarray or scipy sparse matrix
    count : int
        Number of algebraically largest eigenpairs, ``1 <= count <= n``.
    seed : int
    tol : float
        Relative residual tolerance for convergence.
    max_steps : int, optional
        Cap on block iterations, default ``30 * count + 300``.

    Returns
    -------
    values : (count,) ndarray, descending
    vectors : (n, count) ndarray, orthonormal columns; sign fixed so each
        vector's largest-magnitude entry is positive.

    Raises
    ------
    EigsolverError
        If the iteration cap is reached before the residuals converge.
    """
    if sp.issparse(M):
        if not np.all(np.isfinite(M.data)):
            raise ValueError("M contains non-finite entries")
    else:
        M = check_finite(M, "M")
    n = M.shape[0]
    if M.shape[0] != M.shape[1]:
        raise ValueError("M must be square")
    if count < 1 or count > n:
        raise ValueError(f"count must be in [1, {n}]")
    if max_steps is None:
        max_steps = 30 * count + 300

    rng = np.random.default_rng(seed)
    floor = 1e-12

    b0 = min(count, n)
    Q = _orthonormal_block(rng.standard_normal((n, b0)), None, rng, floor)
    AQ = np.asarray(M @ Q)
    T = Q.T @ AQ

    prev_top = None
    last_res = None
    for step in range(max_steps):
        m = Q.shape[1]
        exhausted = m >= n
        # Ritz checks are the expensive part once the basis grows: check every
        # step early, then back off
        check_every = 1 if m <= 4 * count else (3 if m <= 40 * count else 5)
        if exhausted or step % check_every == 0:
            Ts = (T + T.T) / 2.0
            theta, S = np.linalg.eigh(Ts)
            idx = np.argsort(theta)[::-1][:count]
            top_theta = theta[idx]
            Stop = S[:, idx]
            ritz = Q @ Stop
            resid = AQ @ Stop - ritz * top_theta
            res_norms = np.linalg.norm(resid, axis=0)
            last_res = res_norms
            scale = max(np.max(np.abs(theta)), 1e-30)

            if exhausted or np.all(res_norms <= tol * scale):
                stable = (
                    prev_top is not None
                    and np.max(np.abs(prev_top - top_theta)) <= 10 * tol * scale
                )
                if exhausted or stable:
                    # fix signs for reproducibility
                    flip = np.sign(ritz[np.argmax(np.abs(ritz), axis=0), np.arange(count)])
                    flip[flip == 0] = 1.0
                    return top_theta.copy(), ritz * flip
                prev_top = top_theta.copy()
            else:
                prev_top = None

        # next block seeded by the image of the previous one; once the basis
        # passes half the dimension, finishing the full space outright is
        # cheaper than more slow-converging block steps (and exact)
        b = min(count, n - m)
        if m >= max(4 * count, n // 2):
            b = n - m
        seed_cols = AQ[:, -b0:][:, : min(b, b0)]
        if b > b0:
            seed_cols = np.hstack([seed_cols, rng.standard_normal((n, b - b0))])
        X = _orthonormal_block(seed_cols, Q, rng, floor)
        AX = np.asarray(M @ X)
        # grow the projected matrix incrementally
        cross = Q.T @ AX
        T = np.block([[T, cross], [X.T @ AQ, X.T @ AX]])
        Q = np.hstack([Q, X])
        AQ = np.hstack([AQ, AX])
        b0 = b

    raise EigsolverError(
        f"partial eigensolver did not converge in {max_steps} block steps",
        residuals=last_res,
    )


def solve_spd(G, B):
    """Solve ``G @ Y = B`` for symmetric positive definite G.

    Cholesky factorization plus one step of iterative refinement when the
    first residual exceeds 1e-12 * ||B||_F.

    Raises
    ------
    NumericalError
        If the factorization detects a non-SPD matrix.
    ValueError
        If G is not symmetric within 1e-8 of its magnitude.
    """
    G = check_finite(G, "G")
    B = check_finite(B, "B")
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("G must be square")
    scale = np.max(np.abs(G)) if G.size else 0.0
    if not np.allclose(G, G.T, rtol=0.0, atol=1e-8 * max(scale, 1.0)):
        raise ValueError("G must be symmetric")
    squeeze = B.ndim == 1
    Bm = B[:, None] if squeeze else B
    if Bm.shape[0] != G.shape[0]:
        raise ValueError("G and B dimensions do not match")
    try:
        cf = scipy.linalg.cho_factor(G, lower=True, check_finite=False)
        Y = scipy.linalg.cho_solve(cf, Bm, check_finite=False)
        bnorm = np.linalg.norm(Bm)
        R = Bm - G @ Y
        if np.linalg.norm(R) > 1e-12 * max(bnorm, 1e-300):
            Y = Y + scipy.linalg.cho_solve(cf, R, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"matrix is not positive definite: {exc}") from exc
    return Y[:, 0] if squeeze else Y
