"""Semismooth Newton method for the dual of one proximal-DCA subproblem, primal
recovery, and the checkable inexactness certificate."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import clarke_diag, project_nonneg, prox_logdet, prox_logdet_dderiv

__all__ = [
    "SsnParams",
    "SubproblemContext",
    "SsnResult",
    "Certificate",
    "CertificateError",
    "dual_value",
    "dual_gradient",
    "dual_jacobian_apply",
    "ssn_solve",
    "recover_primal",
    "subproblem_primal_value",
    "subproblem_error_vector",
    "check_stop_condition",
]


class CertificateError(RuntimeError):
    """The certificate precondition r = ||(A*w + J - E)^{-1} E||_2 < 1 failed;
    the caller must tighten the Newton tolerance and retry."""

    def __init__(self, r):
        super().__init__(f"error certificate unusable: r = {r:.3e} >= 1")
        self.r = float(r)


@dataclass(frozen=True)
class SsnParams:
    """Newton parameters: forcing bounds (eta_bar, tau), Armijo constants
    (mu, rho), iteration caps, and the gradient tolerance."""

    eta_bar: float = 0.1
    tau: float = 0.5
    mu: float = 0.25
    rho: float = 0.5
    max_iter: int = 100
    grad_tol: float = 1e-6
    cg_max_iter: int = 500
    cg_ridge: float = 1e-12
    max_linesearch: int = 50

    def __post_init__(self):
        if not 0 < self.eta_bar < 1:
            raise ValueError("eta_bar must lie in (0, 1)")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")
        if not 0 < self.mu < 0.5:
            raise ValueError("mu must lie in (0, 0.5)")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")


class SubproblemContext:
    """One proximal-DCA subproblem: proximal weight sigma, reference pair
    (theta_ref = A* w_ref, w_ref), and the linearized cost matrix.

    Holds a reference to the immutable problem data for the linear maps and J.
    """

    def __init__(self, problem, sigma, theta_ref, w_ref, cost_matrix):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        theta_ref = np.asarray(theta_ref, dtype=float)
        w_ref = np.asarray(w_ref, dtype=float).reshape(-1)
        cost_matrix = np.asarray(cost_matrix, dtype=float)
        n, m = problem.n, problem.m
        if theta_ref.shape != (n, n) or cost_matrix.shape != (n, n):
            raise ValueError("matrix arguments must be n x n")
        if w_ref.shape[0] != m:
            raise ValueError("w_ref must have one entry per candidate edge")
        scale = max(1.0, float(np.abs(theta_ref).max()))
        if np.abs(theta_ref - theta_ref.T).max() > 1e-10 * scale:
            raise ValueError("theta_ref must be symmetric")
        if np.abs(theta_ref.sum(axis=1)).max() > 1e-8 * scale:
            raise ValueError("theta_ref must have zero row sums")
        self.problem = problem
        self.sigma = float(sigma)
        self.theta_ref = theta_ref
        self.w_ref = w_ref
        self.cost_matrix = cost_matrix

    def base_point(self, Y):
        """Prox base point theta_ref + J - (K + Y)/sigma."""
        return self.theta_ref + self.problem.J - (self.cost_matrix + Y) / self.sigma

    def projection_point(self, Y):
        """Projection argument w_ref + A(Y)/sigma."""
        return self.w_ref + self.problem.a(Y) / self.sigma


@dataclass(frozen=True)
class _DualPoint:
    value: float
    grad: np.ndarray
    cache: object
    c: np.ndarray
    w_hat: np.ndarray
    theta_hat: np.ndarray


def _dual_eval(Y, ctx):
    """Evaluate the dual objective and gradient at Y with one eigendecomposition.

    The dual value is the Lagrangian at its inner minimizers: theta minimizes a
    log-det prox problem and w a non-negative projection.
    """
    sigma = ctx.sigma
    P, cache = prox_logdet(ctx.base_point(Y), sigma)
    theta_hat = P - ctx.problem.J
    c = ctx.projection_point(Y)
    w_hat = project_nonneg(c)
    grad = theta_hat - ctx.problem.astar(w_hat)
    value = (
        -float(np.log(cache.d).sum())
        + float(np.vdot(ctx.cost_matrix, theta_hat))
        + 0.5 * sigma * float(np.linalg.norm(theta_hat - ctx.theta_ref) ** 2)
        + 0.5 * sigma * float(np.linalg.norm(w_hat - ctx.w_ref) ** 2)
        + float(np.vdot(grad, Y))
    )
    return _DualPoint(value, grad, cache, c, w_hat, theta_hat)


def dual_value(Y, ctx):
    """Concave dual objective of the subproblem at the multiplier Y."""
    return _dual_eval(np.asarray(Y, dtype=float), ctx).value


def dual_gradient(Y, ctx):
    """Gradient of the dual objective: recovered theta minus A* of recovered w."""
    return _dual_eval(np.asarray(Y, dtype=float), ctx).grad


def dual_jacobian_apply(Y, H, ctx, mask, cache=None):
    """Apply a generalized Jacobian element of the dual gradient to H.

    ``mask`` must be the Clarke mask at the projection point of Y and ``cache``
    the prox eigendecomposition at the base point of Y; a mismatched cache
    raises. The operator is linear, self-adjoint, and negative semidefinite.
    """
    base = ctx.base_point(np.asarray(Y, dtype=float))
    if cache is None:
        _, cache = prox_logdet(base, ctx.sigma)
    elif not cache.matches(base):
        raise ValueError("stale eigendecomposition cache for this multiplier")
    return _jacobian_apply(H, ctx, mask, cache)


def _jacobian_apply(H, ctx, mask, cache):
    d = prox_logdet_dderiv(cache, H)
    p = ctx.problem.astar(mask * ctx.problem.a(H))
    return -(d + p) / ctx.sigma


def _newton_direction(point, ctx, mask, params, gnorm):
    """Inexact Newton direction: conjugate gradients on the negated Jacobian
    with absolute residual target min(eta_bar, gnorm^(1+tau)) and a tiny ridge."""
    target = min(params.eta_bar, gnorm ** (1.0 + params.tau))
    ridge = params.cg_ridge

    def T(H):
        return -_jacobian_apply(H, ctx, mask, point.cache) + ridge * H

    g = point.grad
    x = np.zeros_like(g)
    r = g.copy()
    rs = float(np.vdot(r, r))
    if np.sqrt(rs) <= target:
        return g.copy()
    p = r.copy()
    for _ in range(params.cg_max_iter):
        Tp = T(p)
        pTp = float(np.vdot(p, Tp))
        if pTp <= 0:
            break
        alpha = rs / pTp
        x += alpha * p
        r -= alpha * Tp
        rs_new = float(np.vdot(r, r))
        if np.sqrt(rs_new) <= target:
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x


@dataclass
class SsnResult:
    """Final multiplier Y, residual matrix E = -grad, and run diagnostics."""

    Y: np.ndarray
    E: np.ndarray
    iterations: int
    converged: bool
    grad_norm: float
    status: str
    grad_norms: list = field(default_factory=list)
    values: list = field(default_factory=list)


def ssn_solve(ctx, Y0=None, params=None):
    """Maximize the dual by a globalized semismooth Newton method.

    Each step solves the Newton system inexactly and backtracks with an Armijo
    rule on the dual value; accepted steps never decrease the dual. Returns
    once the gradient norm falls below ``grad_tol``, on the iteration cap, or
    with a flag when the line search stalls.
    """
    params = params or SsnParams()
    n = ctx.problem.n
    Y = np.zeros((n, n)) if Y0 is None else np.array(Y0, dtype=float)
    cur = _dual_eval(Y, ctx)
    grad_norms = []
    values = [cur.value]
    for j in range(params.max_iter):
        gnorm = float(np.linalg.norm(cur.grad))
        grad_norms.append(gnorm)
        if gnorm <= params.grad_tol:
            return SsnResult(Y, -cur.grad, j, True, gnorm, "converged", grad_norms, values)
        mask = clarke_diag(cur.c)
        D = _newton_direction(cur, ctx, mask, params, gnorm)
        gD = float(np.vdot(cur.grad, D))
        if not np.isfinite(gD) or gD <= 0:
            D = cur.grad.copy()
            gD = gnorm * gnorm
        step = 1.0
        nxt = None
        for _ in range(params.max_linesearch + 1):
            cand = _dual_eval(Y + step * D, ctx)
            if cand.value >= cur.value + params.mu * step * gD:
                nxt = cand
                break
            step *= params.rho
        if nxt is None:
            return SsnResult(
                Y, -cur.grad, j, False, gnorm, "linesearch_failed", grad_norms, values
            )
        Y = Y + step * D
        cur = nxt
        values.append(cur.value)
    gnorm = float(np.linalg.norm(cur.grad))
    grad_norms.append(gnorm)
    converged = gnorm <= params.grad_tol
    status = "converged" if converged else "max_iter"
    return SsnResult(Y, -cur.grad, params.max_iter, converged, gnorm, status, grad_norms, values)


def recover_primal(Y, ctx):
    """Primal pair from a dual multiplier: theta via the log-det prox shifted by
    J, w via the non-negative projection. At the exact dual optimum the pair is
    feasible: theta equals A* w."""
    Y = np.asarray(Y, dtype=float)
    P, _ = prox_logdet(ctx.base_point(Y), ctx.sigma)
    w_bar = project_nonneg(ctx.projection_point(Y))
    return P - ctx.problem.J, w_bar


def subproblem_primal_value(w, ctx):
    """Subproblem objective at the feasible point (A* w, w); +inf off the domain."""
    w = np.asarray(w, dtype=float).reshape(-1)
    if np.any(w < 0):
        return float("inf")
    theta = ctx.problem.astar(w)
    vals = np.linalg.eigvalsh(theta + ctx.problem.J)
    if vals[0] <= 0:
        return float("inf")
    return float(
        -np.log(vals).sum()
        + np.vdot(ctx.cost_matrix, theta)
        + 0.5 * ctx.sigma * np.linalg.norm(theta - ctx.theta_ref) ** 2
        + 0.5 * ctx.sigma * np.linalg.norm(w - ctx.w_ref) ** 2
    )


@dataclass(frozen=True)
class Certificate:
    """Error vector delta with its checkable pair: the contraction factor r and
    the operator-norm bound that dominates ||delta||."""

    delta: np.ndarray
    r: float
    bound: float

    @property
    def delta_norm(self):
        return float(np.linalg.norm(self.delta))


def subproblem_error_vector(w_next, E, ctx):
    """Error vector of the inexact subproblem solution and its certificate.

    With E the negated dual gradient at the returned multiplier, w_next solves
    the subproblem perturbed by delta = -A[sigma E + X1^{-1} - X2^{-1}] where
    X1 = A* w_next + J - E and X2 = A* w_next + J. Requires the contraction
    factor r = ||X1^{-1} E||_2 < 1, else raises :class:`CertificateError`.
    ||delta|| -> 0 as ||E|| -> 0.
    """
    w_next = np.asarray(w_next, dtype=float).reshape(-1)
    E = np.asarray(E, dtype=float)
    X2 = ctx.problem.astar(w_next) + ctx.problem.J
    X1 = X2 - E
    M = np.linalg.solve(X1, E)
    r = float(np.linalg.norm(M, 2))
    if not np.isfinite(r) or r >= 1:
        raise CertificateError(r)
    X1_inv = np.linalg.inv(X1)
    X2_inv = np.linalg.inv(X2)
    delta = -ctx.problem.a(ctx.sigma * E + X1_inv - X2_inv)
    # operator norm of the adjoint map over the spectral-norm unit ball:
    # each component is bounded by 2||M||_2 and the value 2 sqrt(m) is
    # attained at the identity, so the bound below dominates ||delta||
    opnorm_spectral = 2.0 * np.sqrt(ctx.problem.m)
    bound = (
        opnorm_spectral
        * np.linalg.norm(E, 2)
        * (ctx.sigma + np.linalg.norm(X1_inv, 2) ** 2 / (1.0 - r))
    )
    return Certificate(delta, r, float(bound))


def check_stop_condition(delta, w_next, w_prev, sigma, ctx):
    """Inexactness acceptance rule of the outer loop.

    True iff ||delta|| <= (sigma/4)||dw|| + sigma ||A* dw||^2 / (2||dw||) with
    dw = w_next - w_prev; boundary equality counts as satisfied. A zero step is
    accepted only with ||delta|| <= 1e-12, since the rule divides by ||dw||.
    """
    delta_norm = float(np.linalg.norm(delta))
    dw = np.asarray(w_next, dtype=float) - np.asarray(w_prev, dtype=float)
    dwn = float(np.linalg.norm(dw))
    if dwn == 0.0:
        return delta_norm <= 1e-12
    datw = float(np.linalg.norm(ctx.problem.astar(dw)))
    rhs = 0.25 * sigma * dwn + 0.5 * sigma * datw * datw / dwn
    return delta_norm <= rhs
