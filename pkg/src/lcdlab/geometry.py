"""Sphere decomposition and subspace-distance primitives.

The unit sphere splits into compressible vectors (close to sparse ones) and
incompressible vectors (which carry a large set of medium-size coordinates,
the "spread set").  Both notions and the Euclidean distance to an integer
lattice / column span are computed here exactly; they are the geometric
substrate for the arithmetic-structure solvers and the distance experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# a column is dependent if its orthogonalization residual drops below this
# fraction of its original norm
RANK_RTOL = 1e-10


def dist_to_integer_lattice(w: np.ndarray) -> float:
    """Euclidean distance from w to Z^n (nearest integer per coordinate).

    Rounding is numpy's rint (ties to even); at half-integer ties any
    nearest lattice point gives the same distance.
    """
    w = np.asarray(w, dtype=float)
    frac = w - np.rint(w)
    return float(np.linalg.norm(frac))


@dataclass(frozen=True)
class SphereParams:
    """Compressibility parameters (delta, rho)."""

    delta: float
    rho: float

    def __post_init__(self):
        if not (0 < self.delta < 1):
            raise ConfigError("delta must lie in (0,1)")
        if not (0 < self.rho < 1):
            raise ConfigError("rho must lie in (0,1)")

    def sparsity(self, n: int) -> int:
        """floor(delta * n), the sparsity level at dimension n."""
        k = int(math.floor(self.delta * n + 1e-9))
        return k


@dataclass(frozen=True)
class CompressibilityReport:
    distance: float
    best_support: tuple[int, ...]
    is_compressible: bool
    nearest: np.ndarray  # closest sparsity-level unit vector


@dataclass(frozen=True)
class SpreadSet:
    """Certificate that x has many medium-size coordinates.

    indices j satisfy lower <= |x_j| <= upper with lower = rho/sqrt(2n) and
    upper = 1/sqrt(delta*n); success requires at least rho^2*delta*n/2 of
    them.
    """

    indices: tuple[int, ...]
    lower: float
    upper: float
    required: float


def compressibility(x: np.ndarray, params: SphereParams) -> CompressibilityReport:
    """Distance from a unit vector to the set of floor(delta*n)-sparse unit vectors.

    The minimizer over a fixed support S is x_S / ||x_S||, so the distance is
    sqrt(2 - 2*||x_T||) with T the support of the k largest |x_i| (ties broken
    by lowest index).  Compressible means distance <= rho.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ConfigError("x must be a vector")
    n = x.size
    nrm = np.linalg.norm(x)
    if abs(nrm - 1.0) > 1e-9:
        raise ConfigError(f"x must be a unit vector (got ||x|| = {nrm:.12g})")
    k = params.sparsity(n)
    if k < 1:
        raise ConfigError(f"floor(delta*n) = 0 at n={n}, delta={params.delta}")
    # stable argsort on -|x| puts ties in index order
    order = np.argsort(-np.abs(x), kind="stable")
    support = np.sort(order[:k])
    top_norm = float(np.linalg.norm(x[support]))
    distance = math.sqrt(max(0.0, 2.0 - 2.0 * top_norm))
    nearest = np.zeros(n)
    if top_norm > 0:
        nearest[support] = x[support] / top_norm
    return CompressibilityReport(
        distance=distance,
        best_support=tuple(int(i) for i in support),
        is_compressible=bool(distance <= params.rho),
        nearest=nearest,
    )


def spread_set(x: np.ndarray, params: SphereParams) -> SpreadSet | None:
    """Extract the medium-coordinate set of a unit vector, or None.

    Returns the index set J = {j : rho/sqrt(2n) <= |x_j| <= 1/sqrt(delta n)}
    when it has at least rho^2 * delta * n / 2 elements, else None (failure
    is a value, not an exception; incompressible vectors never fail).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    nrm = np.linalg.norm(x)
    if abs(nrm - 1.0) > 1e-9:
        raise ConfigError(f"x must be a unit vector (got ||x|| = {nrm:.12g})")
    lower = params.rho / math.sqrt(2.0 * n)
    upper = 1.0 / math.sqrt(params.delta * n)
    ax = np.abs(x)
    mask = (ax >= lower) & (ax <= upper)
    required = 0.5 * params.rho**2 * params.delta * n
    if mask.sum() < required - 1e-12:
        return None
    return SpreadSet(
        indices=tuple(int(i) for i in np.flatnonzero(mask)),
        lower=lower,
        upper=upper,
        required=required,
    )


def orthonormal_colspan_basis(A: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Rank-revealing orthonormal basis of the column span.

    Modified Gram-Schmidt with one reorthogonalization pass; a column whose
    residual norm falls below rtol times its original norm is declared
    dependent and dropped.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ConfigError("A must be a matrix")
    n, m = A.shape
    basis: list[np.ndarray] = []
    for j in range(m):
        c = A[:, j].astype(float, copy=True)
        orig = np.linalg.norm(c)
        if orig == 0.0:
            continue
        for _ in range(2):
            for q in basis:
                c -= (q @ c) * q
        r = np.linalg.norm(c)
        if r < rtol * orig:
            continue
        basis.append(c / r)
    if not basis:
        return np.zeros((n, 0))
    return np.column_stack(basis)


def project_orthocomplement(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Component of X orthogonal to the column span of A.

    Projection is applied twice so the output is a fixed point of the
    projector to well below 1e-9.
    """
    A = np.asarray(A, dtype=float)
    X = np.asarray(X, dtype=float)
    if A.ndim != 2 or X.ndim != 1 or X.size != A.shape[0]:
        raise ConfigError("need A (n x m) and X in R^n")
    if A.shape[1] >= A.shape[0]:
        raise ConfigError("A must have fewer columns than rows")
    Q = orthonormal_colspan_basis(A)
    if Q.shape[1] == 0:
        return X.copy()
    r = X - Q @ (Q.T @ X)
    r -= Q @ (Q.T @ r)
    return r


def distance_to_colspan(A: np.ndarray, X: np.ndarray) -> float | np.ndarray:
    """Euclidean distance from X to the span of A's columns.

    Accepts a single instance (A: n x m, X: length n) or stacked instances
    (A: B x n x m, X: B x n), returning a float or a length-B array.  The
    stacked path assumes full column rank and computes the distance as the
    last Cholesky pivot of the Gram matrix of [A X]; rank-deficient stacks
    fall back to the single-instance path, which uses the rank-revealing
    orthonormalization (so the distance is to the actual span).
    """
    A = np.asarray(A, dtype=float)
    X = np.asarray(X, dtype=float)
    if A.ndim == 3:
        return _stacked_distances(A, X)
    return float(np.linalg.norm(project_orthocomplement(A, X)))


def _stacked_distances(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    B, n, m = A.shape
    if X.shape != (B, n):
        raise ConfigError("stacked X must have shape (B, n)")
    if m >= n:
        raise ConfigError("A must have fewer columns than rows")
    M = np.empty((B, n, m + 1))
    M[:, :, :m] = A
    M[:, :, m] = X
    G = np.matmul(M.transpose(0, 2, 1), M)
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        # some item is (numerically) rank deficient: do them one by one
        out = np.empty(B)
        for b in range(B):
            out[b] = float(np.linalg.norm(project_orthocomplement(A[b], X[b])))
        return out
    # ||X - proj||^2 is the Schur complement of the A-block in G, i.e. the
    # square of the last Cholesky pivot
    return L[:, m, m].copy()
