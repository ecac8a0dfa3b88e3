"""Symmetric eigen-calculus for the log-determinant proximal map, non-negative
cone projections, and solvers for the shifted edge Gram system."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "sym_eig",
    "EigCache",
    "prox_logdet",
    "prox_logdet_dderiv",
    "moreau_logdet_value",
    "project_nonneg",
    "clarke_diag",
    "edge_gram_matrix",
    "GramSolver",
    "solve_shifted_gram",
    "laplacian_opnorm",
]


def sym_eig(X, check=True):
    """Eigendecomposition X = U Diag(lam) U^T with ascending eigenvalues."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError("a square matrix is required")
    if check:
        scale = np.linalg.norm(X)
        if np.linalg.norm(X - X.T) > 1e-12 * max(1.0, scale):
            raise ValueError("matrix is not symmetric")
    lam, U = np.linalg.eigh(X)
    return U, lam


@dataclass(frozen=True)
class EigCache:
    """Eigendecomposition of a prox base point plus derived quantities.

    ``d`` holds the prox eigenvalues (sqrt(lam^2 + 4/sigma) + lam)/2 and
    ``gamma`` the Hadamard weights of the prox directional derivative.
    Immutable; safe to share across threads.
    """

    U: np.ndarray
    lam: np.ndarray
    sigma: float
    d: np.ndarray
    gamma: np.ndarray
    base: np.ndarray

    def matches(self, X, rtol=1e-12):
        X = np.asarray(X, dtype=float)
        if X.shape != self.base.shape:
            return False
        scale = max(1.0, float(np.abs(self.base).max()))
        return bool(np.abs(X - self.base).max() <= rtol * scale)


def prox_logdet(X, sigma):
    """Proximal point of -log det at X with parameter sigma.

    Returns (P, cache) where P is positive definite and solves
    -P^{-1} + sigma (P - X) = 0.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    U, lam = sym_eig(X)
    s = np.sqrt(lam * lam + 4.0 / sigma)
    d = 0.5 * (s + lam)
    gamma = 0.5 * (1.0 + np.add.outer(lam, lam) / np.add.outer(s, s))
    P = (U * d) @ U.T
    P = 0.5 * (P + P.T)
    cache = EigCache(U, lam, float(sigma), d, gamma, np.asarray(X, dtype=float))
    return P, cache


def prox_logdet_dderiv(cache, H):
    """Directional derivative of the log-det prox at the cached base point:
    U [gamma o (U^T H U)] U^T. Linear and symmetric in H."""
    H = np.asarray(H, dtype=float)
    if H.shape != cache.base.shape:
        raise ValueError("dimension mismatch with the cached base point")
    M = cache.U.T @ H @ cache.U
    out = cache.U @ (cache.gamma * M) @ cache.U.T
    return 0.5 * (out + out.T)


def moreau_logdet_value(X, sigma):
    """Moreau envelope of -log det: -log det(P) + (sigma/2) ||P - X||^2 at P = prox."""
    P, cache = prox_logdet(X, sigma)
    return float(-np.log(cache.d).sum() + 0.5 * sigma * np.linalg.norm(P - X) ** 2)


def project_nonneg(c):
    """Componentwise projection onto the non-negative cone."""
    return np.maximum(np.asarray(c, dtype=float), 0.0)


def clarke_diag(c):
    """Diagonal of a Clarke Jacobian element of the non-negative projection.

    Returns the 0/1 mask with d_i = 1 iff c_i > 0; ties at c_i = 0 resolve to 0,
    which keeps the Newton operator maximally negative definite.
    """
    return (np.asarray(c) > 0).astype(float)


def edge_gram_matrix(B):
    """Matrix form 2I + |B|^T |B| of the composition adjoint-then-Laplacian map."""
    B = sp.csc_matrix(B)
    Babs = abs(B)
    m = B.shape[1]
    return (2.0 * sp.identity(m, format="csc") + (Babs.T @ Babs)).tocsr()


class GramSolver:
    """Solver for the SPD system (3I + |B|^T |B|) x = b.

    Strategies: ``cholesky`` factorizes the m x m system directly (sparse LU;
    SciPy ships no sparse Cholesky), ``smw`` reduces to the n x n system
    3I + |B||B|^T via the Sherman-Morrison-Woodbury identity, ``cg`` runs
    matrix-free conjugate gradients. ``auto`` picks cholesky for m < 5000,
    smw for m >= 5000 with n < 5000, and cg otherwise. Factorizations are
    computed once and the instance is read-only afterwards.
    """

    def __init__(self, B, strategy="auto", cg_tol=1e-10, cg_maxiter=None):
        B = sp.csc_matrix(B)
        n, m = B.shape
        if strategy == "auto":
            if m < 5000:
                strategy = "cholesky"
            elif n < 5000:
                strategy = "smw"
            else:
                strategy = "cg"
        if strategy not in ("cholesky", "smw", "cg"):
            raise ValueError(f"unknown strategy {strategy!r}")
        self.strategy = strategy
        self.m = m
        self.n = n
        self._babs = abs(B).tocsr()
        self._babs_t = self._babs.T.tocsr()
        self._cg_tol = cg_tol
        self._cg_maxiter = cg_maxiter if cg_maxiter is not None else 10 * max(m, 1)
        if strategy == "cholesky":
            M = (edge_gram_matrix(B) + sp.identity(m, format="csr")).tocsc()
            self._lu = spla.splu(M)
        elif strategy == "smw":
            C = 3.0 * np.eye(n) + (self._babs @ self._babs_t).toarray()
            self._cho = sla.cho_factor(C, lower=True)

    def solve(self, b):
        b = np.asarray(b, dtype=float).reshape(-1)
        if b.shape[0] != self.m:
            raise ValueError(f"right-hand side must have length {self.m}")
        if self.strategy == "cholesky":
            return self._lu.solve(b)
        if self.strategy == "smw":
            y = sla.cho_solve(self._cho, self._babs @ b)
            return (b - self._babs_t @ y) / 3.0
        op = spla.LinearOperator(
            (self.m, self.m),
            matvec=lambda v: 3.0 * v + self._babs_t @ (self._babs @ v),
        )
        x, info = spla.cg(op, b, rtol=self._cg_tol, atol=0.0, maxiter=self._cg_maxiter)
        if info != 0:
            raise RuntimeError(f"conjugate gradients failed to converge (info={info})")
        return x


def solve_shifted_gram(solver, b):
    """Solve (3I + |B|^T |B|) x = b with a prepared :class:`GramSolver`."""
    return solver.solve(b)


def laplacian_opnorm(B, tol=1e-8, max_iter=10000):
    """Operator norm of the weights-to-Laplacian map: sqrt(lam_max(2I + |B|^T|B|)).

    Power iteration with relative tolerance ``tol``; the iteration matrix is
    entrywise non-negative, so the all-ones start vector cannot be orthogonal
    to the leading eigenvector.
    """
    G = edge_gram_matrix(B)
    m = G.shape[0]
    if m == 0:
        return 0.0
    v = np.full(m, 1.0 / np.sqrt(m))
    lam = 0.0
    for _ in range(max_iter):
        gv = G @ v
        lam_new = float(v @ gv)
        nv = np.linalg.norm(gv)
        if nv == 0.0:
            return 0.0
        v = gv / nv
        if abs(lam_new - lam) <= tol * max(lam_new, np.finfo(float).tiny):
            lam = lam_new
            break
        lam = lam_new
    return float(np.sqrt(lam))
