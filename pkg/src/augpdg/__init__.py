"""Augmented primal-dual gradient solver with linear-rate certificates."""

from .errors import AugPdgError, CertificateError, NumericError, ProblemFormatError
from .problem import (
    AffineConstraint,
    ProblemSpec,
    QuadraticConstraint,
    StructuredProblem,
    eval_constraints,
    eval_objective,
    finite_diff_check,
    load_problem,
    power_flow_problem,
)
from .lagrangian import aug_value, grad_lambda, grad_x, project_nonneg
from .solver import (
    IterateState,
    KktResidual,
    SolverConfig,
    Trace,
    kkt_residual,
    run,
    step,
)
from .certificate import (
    ActiveSetInfo,
    RateCertificate,
    active_set,
    build_certificate,
    compute_alpha_max,
    compute_delta,
    compute_gamma,
    compute_pi_star,
    format_report,
    lyapunov_value,
    q_delta_matrix,
    sym_eig_extremes,
)
from .oracle import (
    ReferenceSolution,
    estimate_mu,
    estimate_smoothness,
    grid_solve,
    random_kkt_instance,
    solve_powerflow_analytic,
)
from .bench import (
    ExperimentPlan,
    ExperimentReport,
    PowerFlowInstance,
    build_default_instance,
    run_experiment,
    sample_initial,
    write_report,
)

__version__ = "0.1.0"
