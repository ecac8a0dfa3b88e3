import numpy as np
import pytest

import laplace_mcp as lm
from laplace_mcp.dca import subproblem_cost_matrix
from laplace_mcp.ssn import (
    CertificateError,
    SubproblemContext,
    check_stop_condition,
    dual_gradient,
    dual_jacobian_apply,
    dual_value,
    recover_primal,
    ssn_solve,
    subproblem_error_vector,
    subproblem_primal_value,
)

from util import golden_min, random_context, random_symmetric


def one_edge_context(sigma=0.8, w_ref=0.6, lam=0.1):
    """Single-edge subproblem with a closed-form optimum.

    With a = <A(K)> the objective reduces to the scalar problem
    -log(2w) + a w + (5 sigma / 2)(w - w_ref)^2 over w >= 0, whose positive
    stationary point solves 5 sigma w^2 + (a - 5 sigma w_ref) w - 1 = 0.
    """
    g = lm.EdgeGraph(2, [(0, 1)])
    S = np.array([[0.9, 0.15], [0.15, 1.1]])
    problem = lm.ProblemData(S, lm.true_prior(g), lm.PenaltyParams(lam, 1.5))
    w_ref_vec = np.array([w_ref])
    K = subproblem_cost_matrix(w_ref_vec, problem)
    ctx = SubproblemContext(problem, sigma, problem.astar(w_ref_vec), w_ref_vec, K)
    a = float(problem.a(K)[0])
    b = a - 5 * sigma * w_ref
    w_star = (-b + np.sqrt(b * b + 20 * sigma)) / (10 * sigma)
    theta_star = problem.astar([w_star])
    Y_star = (
        np.linalg.inv(theta_star + problem.J)
        - K
        - sigma * problem.astar([w_star - w_ref])
    )
    return ctx, w_star, Y_star


class TestDualValue:
    def test_weak_duality(self):
        ctx, _ = random_context(n=6, seed=0)
        rng = np.random.default_rng(1)
        for _ in range(10):
            Y = random_symmetric(6, rng)
            w_feas = np.abs(rng.standard_normal(ctx.problem.m)) + 0.05
            assert dual_value(Y, ctx) <= subproblem_primal_value(w_feas, ctx) + 1e-9

    def test_midpoint_concavity(self):
        ctx, _ = random_context(n=5, seed=2)
        rng = np.random.default_rng(3)
        for _ in range(10):
            Y1 = random_symmetric(5, rng)
            Y2 = random_symmetric(5, rng)
            mid = dual_value(0.5 * (Y1 + Y2), ctx)
            avg = 0.5 * (dual_value(Y1, ctx) + dual_value(Y2, ctx))
            assert mid >= avg - 1e-10

    def test_strong_duality_on_scalar_instance(self):
        ctx, w_star, Y_star = one_edge_context()
        primal = subproblem_primal_value(np.array([w_star]), ctx)
        assert dual_value(Y_star, ctx) == pytest.approx(primal, rel=1e-10)


class TestDualGradient:
    def test_matches_finite_differences(self):
        ctx, _ = random_context(n=5, seed=4)
        rng = np.random.default_rng(5)
        Y = random_symmetric(5, rng)
        g = dual_gradient(Y, ctx)
        for _ in range(5):
            H = random_symmetric(5, rng)
            H /= np.linalg.norm(H)
            t = 1e-6
            fd = (dual_value(Y + t * H, ctx) - dual_value(Y - t * H, ctx)) / (2 * t)
            assert abs(fd - np.vdot(g, H)) < 1e-5 * max(1.0, abs(fd))

    def test_symmetric(self):
        ctx, _ = random_context(n=6, seed=6)
        Y = random_symmetric(6, np.random.default_rng(7))
        g = dual_gradient(Y, ctx)
        np.testing.assert_allclose(g, g.T, atol=1e-12)

    def test_zero_at_scalar_optimum(self):
        ctx, _, Y_star = one_edge_context()
        assert np.linalg.norm(dual_gradient(Y_star, ctx)) < 1e-10


class TestDualJacobian:
    def test_zero_direction(self):
        ctx, _ = random_context(n=5, seed=8)
        Y = random_symmetric(5, np.random.default_rng(9))
        mask = lm.clarke_diag(ctx.projection_point(Y))
        out = dual_jacobian_apply(Y, np.zeros((5, 5)), ctx, mask)
        assert np.all(out == 0.0)

    def test_self_adjoint(self):
        ctx, _ = random_context(n=6, seed=10)
        rng = np.random.default_rng(11)
        Y = random_symmetric(6, rng)
        mask = lm.clarke_diag(ctx.projection_point(Y))
        _, cache = lm.prox_logdet(ctx.base_point(Y), ctx.sigma)
        for _ in range(5):
            H1 = random_symmetric(6, rng)
            H2 = random_symmetric(6, rng)
            lhs = np.vdot(dual_jacobian_apply(Y, H1, ctx, mask, cache), H2)
            rhs = np.vdot(H1, dual_jacobian_apply(Y, H2, ctx, mask, cache))
            assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))

    def test_negative_definite(self):
        rng = np.random.default_rng(12)
        for seed in range(5):
            ctx, _ = random_context(n=6, seed=20 + seed)
            Y = random_symmetric(6, rng)
            mask = lm.clarke_diag(ctx.projection_point(Y))
            H = random_symmetric(6, rng)
            quad = np.vdot(H, dual_jacobian_apply(Y, H, ctx, mask))
            assert quad < 0.0

    def test_stale_cache_rejected(self):
        ctx, _ = random_context(n=5, seed=13)
        rng = np.random.default_rng(14)
        Y = random_symmetric(5, rng)
        mask = lm.clarke_diag(ctx.projection_point(Y))
        _, cache = lm.prox_logdet(ctx.base_point(Y + 1.0), ctx.sigma)
        with pytest.raises(ValueError):
            dual_jacobian_apply(Y, np.eye(5), ctx, mask, cache)


class TestSsnSolve:
    def test_starts_at_optimum(self):
        ctx, _, Y_star = one_edge_context()
        res = ssn_solve(ctx, Y_star, lm.SsnParams(grad_tol=1e-8))
        assert res.converged
        assert res.iterations <= 1

    def test_converges_on_random_context(self):
        ctx, _ = random_context(n=10, seed=15)
        res = ssn_solve(ctx, None, lm.SsnParams(grad_tol=1e-8))
        assert res.converged
        assert res.grad_norm < 1e-8
        # gradient norms eventually strictly decrease
        tail = res.grad_norms[-3:]
        assert all(tail[i + 1] < tail[i] for i in range(len(tail) - 1))

    def test_dual_ascent(self):
        ctx, _ = random_context(n=8, seed=16)
        res = ssn_solve(ctx, None, lm.SsnParams(grad_tol=1e-8))
        vals = res.values
        assert all(vals[i + 1] >= vals[i] - 1e-12 for i in range(len(vals) - 1))

    def test_zero_e_at_convergence(self):
        ctx, _ = random_context(n=6, seed=17)
        res = ssn_solve(ctx, None, lm.SsnParams(grad_tol=1e-9))
        assert np.linalg.norm(res.E) <= 1e-9


class TestRecoverPrimal:
    def test_nonnegative_and_definite(self):
        ctx, _ = random_context(n=7, seed=18)
        rng = np.random.default_rng(19)
        for _ in range(5):
            Y = random_symmetric(7, rng)
            theta_bar, w_bar = recover_primal(Y, ctx)
            assert np.all(w_bar >= 0.0)
            assert np.linalg.eigvalsh(theta_bar + ctx.problem.J)[0] > 0.0

    def test_gradient_identity(self):
        # the dual gradient equals the primal infeasibility of the recovery pair
        ctx, _ = random_context(n=6, seed=20)
        Y = random_symmetric(6, np.random.default_rng(21))
        theta_bar, w_bar = recover_primal(Y, ctx)
        gap = theta_bar - ctx.problem.astar(w_bar)
        np.testing.assert_allclose(gap, dual_gradient(Y, ctx), atol=1e-12)

    def test_scalar_instance_matches_golden_section(self):
        ctx, w_star, _ = one_edge_context()
        res = ssn_solve(ctx, None, lm.SsnParams(grad_tol=1e-12))
        _, w_bar = recover_primal(res.Y, ctx)
        oracle = golden_min(
            lambda w: subproblem_primal_value(np.array([w]), ctx), 1e-6, 10.0
        )
        assert abs(w_bar[0] - oracle) < 1e-8
        assert abs(w_bar[0] - w_star) < 1e-8


class TestSubproblemOracle:
    def test_matches_generic_convex_solver(self):
        # independent multi-edge oracle: the same convex subproblem in cvxpy
        cp = pytest.importorskip("cvxpy")
        ctx, _ = random_context(n=7, seed=33, sigma=0.6)
        problem = ctx.problem
        n = problem.n
        w = cp.Variable(problem.m, nonneg=True)
        theta = 0
        for k, (i, j) in enumerate(problem.prior.edges):
            M = np.zeros((n, n))
            M[i, i] = M[j, j] = 1.0
            M[i, j] = M[j, i] = -1.0
            theta = theta + w[k] * M
        objective = cp.Minimize(
            -cp.log_det(theta + problem.J)
            + cp.sum(cp.multiply(ctx.cost_matrix, theta))
            + ctx.sigma / 2 * cp.sum_squares(theta - ctx.theta_ref)
            + ctx.sigma / 2 * cp.sum_squares(w - ctx.w_ref)
        )
        cvx = cp.Problem(objective)
        cvx.solve(solver=cp.SCS, eps=1e-10, max_iters=200000)
        assert cvx.status == "optimal"
        res = ssn_solve(ctx, None, lm.SsnParams(grad_tol=1e-11))
        _, w_bar = recover_primal(res.Y, ctx)
        np.testing.assert_allclose(w_bar, w.value, atol=1e-8)
        # strong duality at the computed pair
        assert subproblem_primal_value(w_bar, ctx) == pytest.approx(
            dual_value(res.Y, ctx), abs=1e-9
        )


class TestErrorCertificate:
    def test_zero_error_gives_zero_delta(self):
        ctx, w_k = random_context(n=6, seed=22)
        cert = subproblem_error_vector(w_k, np.zeros((6, 6)), ctx)
        assert np.all(cert.delta == 0.0)
        assert cert.r == 0.0
        assert cert.bound == 0.0

    def test_bound_dominates(self):
        for seed in range(5):
            ctx, _ = random_context(n=7, seed=30 + seed)
            res = ssn_solve(ctx, None, lm.SsnParams(grad_tol=1e-5))
            _, w_bar = recover_primal(res.Y, ctx)
            cert = subproblem_error_vector(w_bar, res.E, ctx)
            assert cert.r < 1.0
            assert cert.delta_norm <= cert.bound

    def test_delta_scales_with_error(self):
        ctx, _ = random_context(n=6, seed=23)
        res = ssn_solve(ctx, None, lm.SsnParams(grad_tol=1e-4))
        _, w_bar = recover_primal(res.Y, ctx)
        E = res.E
        if np.linalg.norm(E) < 1e-10:
            E = 1e-6 * np.eye(6)
        n1 = subproblem_error_vector(w_bar, E, ctx).delta_norm
        n2 = subproblem_error_vector(w_bar, 0.5 * E, ctx).delta_norm
        assert 0.3 < n2 / n1 < 0.7

    def test_large_error_rejected(self):
        ctx, w_k = random_context(n=5, seed=24)
        E = 100.0 * np.eye(5)
        with pytest.raises(CertificateError):
            subproblem_error_vector(w_k, E, ctx)

    def test_perturbed_kkt_point(self):
        # w_next must be the exact KKT point of the delta-perturbed subproblem
        ctx, w_k = random_context(n=8, seed=25, sigma=0.7)
        res = ssn_solve(ctx, None, lm.SsnParams(grad_tol=1e-8))
        _, w_next = recover_primal(res.Y, ctx)
        cert = subproblem_error_vector(w_next, res.E, ctx)
        problem, sigma = ctx.problem, ctx.sigma
        X2_inv = np.linalg.inv(problem.astar(w_next) + problem.J)
        grad = (
            -problem.a(X2_inv)
            + problem.a(ctx.cost_matrix)
            + cert.delta
            + sigma * (w_next - w_k)
            + sigma * problem.a(problem.astar(w_next - w_k))
        )
        kkt = np.abs(np.where(w_next > 1e-12, grad, np.minimum(grad, 0.0)))
        assert kkt.max() < 1e-10


class TestStopCondition:
    def test_zero_delta_accepts(self):
        ctx, w_k = random_context(n=5, seed=26)
        w_next = w_k + 0.01
        assert check_stop_condition(np.zeros(ctx.problem.m), w_next, w_k, 1.0, ctx)

    def test_boundary_equality_accepts(self):
        ctx, w_k = random_context(n=5, seed=27)
        w_next = w_k + 0.01
        dw = w_next - w_k
        dwn = np.linalg.norm(dw)
        rhs = 0.25 * 1.0 * dwn + 0.5 * 1.0 * np.linalg.norm(
            ctx.problem.astar(dw)
        ) ** 2 / dwn
        delta = np.zeros(ctx.problem.m)
        delta[0] = rhs
        assert check_stop_condition(delta, w_next, w_k, 1.0, ctx)

    def test_above_boundary_rejects(self):
        ctx, w_k = random_context(n=5, seed=28)
        w_next = w_k + 0.01
        dw = w_next - w_k
        dwn = np.linalg.norm(dw)
        rhs = 0.25 * dwn + 0.5 * np.linalg.norm(ctx.problem.astar(dw)) ** 2 / dwn
        delta = np.zeros(ctx.problem.m)
        delta[0] = 1.01 * rhs
        assert not check_stop_condition(delta, w_next, w_k, 1.0, ctx)

    def test_zero_step_requires_exact_solve(self):
        ctx, w_k = random_context(n=5, seed=29)
        tiny = np.full(ctx.problem.m, 1e-13 / np.sqrt(ctx.problem.m))
        assert check_stop_condition(tiny, w_k, w_k, 1.0, ctx)
        big = np.full(ctx.problem.m, 1e-3)
        assert not check_stop_condition(big, w_k, w_k, 1.0, ctx)


class TestContextValidation:
    def test_rejects_bad_sigma(self):
        ctx, w_k = random_context(n=4, seed=31)
        with pytest.raises(ValueError):
            SubproblemContext(
                ctx.problem, 0.0, ctx.theta_ref, ctx.w_ref, ctx.cost_matrix
            )

    def test_rejects_nonzero_row_sums(self):
        ctx, _ = random_context(n=4, seed=32)
        with pytest.raises(ValueError):
            SubproblemContext(
                ctx.problem, 1.0, np.eye(4), ctx.w_ref, ctx.cost_matrix
            )
