"""ADMM for the trace-penalized (l1) Laplacian likelihood model. Serves as the
standalone l1 baseline and as the warm start for the non-convex solver."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .linalg import project_nonneg, prox_logdet
from .report import SolveReport

__all__ = [
    "AdmmParams",
    "AdmmState",
    "KktResiduals",
    "initial_state",
    "admm_step",
    "kkt_residuals",
    "solve_l1",
]

_GOLDEN = 0.5 * (1.0 + np.sqrt(5.0))


@dataclass
class AdmmParams:
    eps: float = 1e-5
    max_iter: int = 20000
    tau: float = 1.618
    sigma0: float = 1.0
    adapt_every: int = 50
    adapt_lo: float = 0.1
    adapt_hi: float = 10.0
    history_every: int = 50

    def __post_init__(self):
        if not 0 < self.tau < _GOLDEN:
            raise ValueError("dual step length tau must lie in (0, (1+sqrt(5))/2)")
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        if self.eps <= 0:
            raise ValueError("eps must be positive")


@dataclass
class AdmmState:
    """One four-block iterate: splitting variables (x, theta, w) and dual
    multipliers (Y, zeta), plus the current penalty sigma and step tau."""

    x: np.ndarray
    theta: np.ndarray
    w: np.ndarray
    Y: np.ndarray
    zeta: np.ndarray
    sigma: float
    tau: float


def initial_state(problem, params=None):
    params = params or AdmmParams()
    n, m = problem.n, problem.m
    return AdmmState(
        x=np.zeros(m),
        theta=np.zeros((n, n)),
        w=np.zeros(m),
        Y=np.zeros((n, n)),
        zeta=np.zeros(m),
        sigma=params.sigma0,
        tau=params.tau,
    )


def admm_step(state, problem, gram):
    """One four-block update.

    x solves (I + A A*) x = rhs through the shifted Gram system, theta is a
    log-det prox, w is a non-negative projection, and both multipliers move
    with step tau * sigma.
    """
    sig = state.sigma
    inv = 1.0 / sig
    K = problem.shifted_S
    rhs = problem.a(state.theta + inv * state.Y) + state.w + inv * state.zeta
    x = gram.solve(rhs)
    Ax = problem.astar(x)
    P, _ = prox_logdet(problem.J + Ax - inv * state.Y - inv * K, sig)
    theta = P - problem.J
    w = project_nonneg(x - inv * state.zeta)
    Y = state.Y + state.tau * sig * (theta - Ax)
    zeta = state.zeta + state.tau * sig * (w - x)
    return AdmmState(x=x, theta=theta, w=w, Y=Y, zeta=zeta, sigma=sig, tau=state.tau)


def _neg_logdet_chol(M):
    """-log det(M) via Cholesky, +inf when M is not positive definite."""
    try:
        c, _ = sla.cho_factor(M, lower=True, check_finite=False)
    except sla.LinAlgError:
        return float("inf")
    return float(-2.0 * np.log(np.diag(c)).sum())


@dataclass(frozen=True)
class KktResiduals:
    """Relative KKT residuals (primal, dual, gap) with the two objectives."""

    eta_p: float
    eta_d: float
    eta_g: float
    pobj: float
    dobj: float

    @property
    def max(self):
        return max(self.eta_p, self.eta_d, self.eta_g)

    def __iter__(self):
        return iter((self.eta_p, self.eta_d, self.eta_g))


def kkt_residuals(state, problem):
    """Relative KKT residuals of the current iterate.

    dobj falls back to -inf when Y + K is not positive definite, in which case
    the gap residual saturates at 1.
    """
    K = problem.shifted_S
    Atw = problem.astar(state.w)
    Atx = problem.astar(state.x)
    pobj = _neg_logdet_chol(Atw + problem.J) + float(np.vdot(K, Atw))
    YK = state.Y + K
    ld = _neg_logdet_chol(YK)
    if np.isinf(ld):
        dobj = float("-inf")
    else:
        dobj = -ld - float(np.vdot(problem.J, YK)) + problem.n
    eta_p = max(
        max(np.linalg.norm(state.theta - Atx), np.linalg.norm(state.w - state.x))
        / (1.0 + np.linalg.norm(state.x)),
        np.linalg.norm(project_nonneg(-state.w)) / (1.0 + np.linalg.norm(state.w)),
    )
    eta_d = max(
        np.linalg.norm(problem.a(state.Y) + state.zeta),
        np.linalg.norm(project_nonneg(-state.zeta)),
    ) / (1.0 + np.linalg.norm(state.zeta))
    if np.isfinite(pobj) and np.isfinite(dobj):
        eta_g = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    else:
        eta_g = 1.0
    return KktResiduals(float(eta_p), float(eta_d), float(eta_g), pobj, dobj)


def solve_l1(problem, params=None):
    """Solve the l1 (trace) penalized model to the relative KKT tolerance.

    Terminates when max(eta_p, eta_d, eta_g) < eps, or with a cap-hit flag after
    ``max_iter`` iterations; the last iterate is returned either way. The penalty
    sigma rescales by 2 whenever eta_p/eta_d leaves the configured band, checked
    every ``adapt_every`` iterations.
    """
    params = params or AdmmParams()
    t0 = time.perf_counter()
    gram = problem.gram_solver
    state = initial_state(problem, params)
    history = []
    termination = "max_iter"
    iterations = params.max_iter
    res = None
    for it in range(1, params.max_iter + 1):
        state = admm_step(state, problem, gram)
        res = kkt_residuals(state, problem)
        if it % params.history_every == 0 or it == 1:
            history.append(
                {
                    "iteration": it,
                    "pobj": res.pobj,
                    "dobj": res.dobj,
                    "eta_p": res.eta_p,
                    "eta_d": res.eta_d,
                    "eta_g": res.eta_g,
                    "sigma": state.sigma,
                }
            )
        if res.max < params.eps:
            termination = "converged"
            iterations = it
            break
        if it % params.adapt_every == 0:
            ratio = res.eta_p / max(res.eta_d, 1e-30)
            if ratio > params.adapt_hi:
                state.sigma *= 2.0
            elif ratio < params.adapt_lo:
                state.sigma /= 2.0
    config = {
        "model": "cgl-l1",
        "lam": problem.params.lam,
        "eps": params.eps,
        "max_iter": params.max_iter,
        "tau": params.tau,
        "sigma0": params.sigma0,
        "initial_point": "zeros",
        "prior_tag": problem.prior_tag,
    }
    if not history or history[-1]["iteration"] != iterations:
        history.append(
            {
                "iteration": iterations,
                "pobj": res.pobj,
                "dobj": res.dobj,
                "eta_p": res.eta_p,
                "eta_d": res.eta_d,
                "eta_g": res.eta_g,
                "sigma": state.sigma,
            }
        )
    return SolveReport(
        model="cgl-l1",
        n=problem.n,
        edges=problem.prior.edges,
        w=state.w,
        objective=res.pobj,
        termination=termination,
        wall_time_s=time.perf_counter() - t0,
        history=history,
        config=config,
        warm_start=None,
    )
