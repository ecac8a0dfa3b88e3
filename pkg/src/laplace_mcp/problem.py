"""Shared problem data: covariance, connectivity prior, penalty parameters, and
cached linear-operator state reused across solver components."""

from __future__ import annotations

import copy

import numpy as np

from .graphs import (
    ConnectivityPrior,
    EdgeGraph,
    incidence_matrix,
    is_connected,
    laplacian_adjoint,
    weights_to_laplacian,
)
from .linalg import GramSolver, laplacian_opnorm
from .penalty import PenaltyParams

__all__ = ["ProblemData"]


class ProblemData:
    """Covariance S, candidate edge pattern, penalty parameters, and J = (1/n)11^T.

    Heavy derived objects (incidence matrix, Gram factorization, operator norm)
    are built lazily and cached; everything is read-only after construction, so
    one instance can back many concurrent solver runs.
    """

    def __init__(self, S, prior, params, gram_strategy="auto"):
        S = np.asarray(S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError("covariance must be a square matrix")
        if not np.all(np.isfinite(S)):
            raise ValueError("covariance contains non-finite entries")
        if np.linalg.norm(S - S.T) > 1e-8 * max(1.0, np.linalg.norm(S)):
            raise ValueError("covariance is not symmetric")
        S = 0.5 * (S + S.T)
        if isinstance(prior, ConnectivityPrior):
            tag = prior.tag
            prior = prior.graph
        elif isinstance(prior, EdgeGraph):
            tag = "file"
        else:
            raise TypeError("prior must be an EdgeGraph or ConnectivityPrior")
        prior = prior.unweighted()
        if prior.m == 0:
            raise ValueError("connectivity prior has no candidate edges")
        if prior.n != S.shape[0]:
            raise ValueError("covariance and prior disagree on the node count")
        if not isinstance(params, PenaltyParams):
            params = PenaltyParams(*params)
        self.S = S
        self.S.setflags(write=False)
        self.prior = prior
        self.prior_tag = tag
        self.params = params
        self.n = prior.n
        self.m = prior.m
        self.J = np.full((self.n, self.n), 1.0 / self.n)
        self.J.setflags(write=False)
        self.a_of_S = laplacian_adjoint(S, prior)
        self.a_of_S.setflags(write=False)
        self._gram_strategy = gram_strategy
        self._incidence = None
        self._gram = None
        self._opnorm = None
        self._shifted_S = None

    def astar(self, w):
        return weights_to_laplacian(w, self.prior)

    def a(self, X):
        return laplacian_adjoint(X, self.prior)

    @property
    def incidence(self):
        if self._incidence is None:
            self._incidence = incidence_matrix(self.prior)
        return self._incidence

    @property
    def gram_solver(self):
        if self._gram is None:
            self._gram = GramSolver(self.incidence, strategy=self._gram_strategy)
        return self._gram

    @property
    def opnorm(self):
        if self._opnorm is None:
            self._opnorm = laplacian_opnorm(self.incidence)
        return self._opnorm

    @property
    def shifted_S(self):
        """S + lam I, the effective data matrix of the trace-penalized model."""
        if self._shifted_S is None:
            M = self.S + self.params.lam * np.eye(self.n)
            M.setflags(write=False)
            self._shifted_S = M
        return self._shifted_S

    def prior_connected(self):
        return is_connected(self.prior)

    def with_params(self, params):
        """Copy sharing the cached operators but with different penalty parameters."""
        other = copy.copy(self)
        other.params = params if isinstance(params, PenaltyParams) else PenaltyParams(*params)
        other._shifted_S = None
        return other
