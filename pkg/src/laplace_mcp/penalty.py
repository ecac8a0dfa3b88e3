"""Minimax concave penalty, its difference-of-convex split, and the penalized
negative log-likelihood objective.

A penalty enters the solvers only through the triple (value, smooth part,
smooth-part gradient), so other separable non-convex penalties can slot in by
providing the same three functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PenaltyParams",
    "mcp_value",
    "dc_smooth_value",
    "dc_smooth_grad",
    "dc_smooth_grad_matrix",
    "mcp_matrix_value",
    "objective_value",
]


@dataclass(frozen=True)
class PenaltyParams:
    """MCP parameters: penalty level lam >= 0 and concavity gamma > 1.

    lam = 0 turns the penalty off entirely, which the solvers use for
    maximum-likelihood-only runs.
    """

    lam: float
    gamma: float

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError("lam must be finite and non-negative")
        if not np.isfinite(self.gamma) or self.gamma <= 1:
            raise ValueError("gamma must exceed 1")


def mcp_value(x, params):
    """MCP: lam|x| - x^2/(2 gamma) inside |x| <= gamma*lam, else the plateau
    gamma*lam^2/2. Even, non-decreasing on [0, inf), bounded by the plateau."""
    x = np.asarray(x, dtype=float)
    lam, gamma = params.lam, params.gamma
    ax = np.abs(x)
    inner = lam * ax - x * x / (2.0 * gamma)
    return np.where(ax <= gamma * lam, inner, 0.5 * gamma * lam * lam)


def dc_smooth_value(x, params):
    """Smooth convex part h of the split MCP = lam|x| - h(x)."""
    x = np.asarray(x, dtype=float)
    lam, gamma = params.lam, params.gamma
    ax = np.abs(x)
    return np.where(
        ax <= gamma * lam,
        x * x / (2.0 * gamma),
        lam * ax - 0.5 * gamma * lam * lam,
    )


def dc_smooth_grad(x, params):
    """Gradient of the smooth part: min(|x|/gamma, lam) * sign(x).

    Continuous, bounded by lam in magnitude, and (1/gamma)-Lipschitz.
    """
    x = np.asarray(x, dtype=float)
    return np.minimum(np.abs(x) / params.gamma, params.lam) * np.sign(x)


def dc_smooth_grad_matrix(theta, params):
    """Entrywise smooth-part gradient on the off-diagonal, zero diagonal."""
    theta = np.asarray(theta, dtype=float)
    G = dc_smooth_grad(theta, params)
    np.fill_diagonal(G, 0.0)
    return G


def mcp_matrix_value(theta, params):
    """Penalty of a symmetric matrix: sum of MCP over off-diagonal entries."""
    theta = np.asarray(theta, dtype=float)
    p = mcp_value(theta, params)
    return float(p.sum() - np.trace(p))


def objective_value(w, problem):
    """Penalized objective -log det(Theta + J) + <S, Theta> + P(Theta) at Theta
    built from the edge weights w.

    Returns +inf instead of raising when w is infeasible or Theta + J has an
    eigenvalue below 1e-12.
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != problem.m:
        raise ValueError(f"expected {problem.m} weights, got {w.shape[0]}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        return float("inf")
    theta = problem.astar(w)
    vals = np.linalg.eigvalsh(theta + problem.J)
    if vals[0] < 1e-12:
        return float("inf")
    # <S, A*w> = <A(S), w>; P(Theta) counts each edge entry twice (ij and ji).
    penalty = 2.0 * float(np.sum(mcp_value(w, problem.params)))
    return float(-np.log(vals).sum() + problem.a_of_S @ w + penalty)
