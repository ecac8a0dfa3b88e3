"""Sparse combinatorial graph Laplacian estimation with a minimax concave penalty.

Solves the non-convex MCP-penalized maximum-likelihood model over the cone of
graph Laplacians by an inexact proximal difference-of-convex loop whose convex
subproblems are handled through a semismooth Newton method on their duals, with
an ADMM solver for the l1 (trace) penalized model as warm start and baseline.
"""

from .admm import AdmmParams, admm_step, kkt_residuals, solve_l1
from .dca import DcaParams, DescentError, descent_check, solve_mcp, subproblem_cost_matrix
from .graphs import (
    ConnectivityPrior,
    EdgeGraph,
    GraphError,
    gen_erdos_renyi,
    gen_grid,
    gen_modular,
    generate_connected,
    incidence_matrix,
    is_connected,
    laplacian_adjoint,
    perturb_connectivity,
    population_covariance,
    sample_covariance,
    sample_weights,
    true_prior,
    weights_to_laplacian,
)
from .linalg import (
    GramSolver,
    clarke_diag,
    edge_gram_matrix,
    laplacian_opnorm,
    moreau_logdet_value,
    project_nonneg,
    prox_logdet,
    prox_logdet_dderiv,
    solve_shifted_gram,
    sym_eig,
)
from .metrics import EdgeDecision, detected_edges, edge_decision, f1_score, recovery_error
from .penalty import (
    PenaltyParams,
    dc_smooth_grad,
    dc_smooth_grad_matrix,
    dc_smooth_value,
    mcp_matrix_value,
    mcp_value,
    objective_value,
)
from .problem import ProblemData
from .report import SolveReport
from .ssn import (
    Certificate,
    CertificateError,
    SsnParams,
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

__version__ = "0.1.0"
