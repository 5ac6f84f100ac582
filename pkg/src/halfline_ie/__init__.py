"""Constructive solvers for nonlinear integral equations with sum-difference
kernels on the half-line.

Two equation classes are covered: a quasilinear equation whose solutions grow
linearly with prescribed slope, and an essentially nonlinear equation whose
bounded solution vanishes at the origin and approaches a fixed-point level at
infinity.  Both are solved by monotone Picard schemes with certified two-sided
bounds, geometric-rate diagnostics, and structural validators for every
ingredient (kernel, nonlinearity, perturbation).
"""

from .constants import (
    Constants,
    bisect_root,
    compute_M,
    compute_eta,
    compute_rate_k,
    compute_xi,
    finalize_constants,
)
from .diagnostics import (
    IterationTrace,
    ReportSection,
    RunReport,
    StoppingCriteria,
    compose_report,
    fit_geometric_rate,
)
from .exceptions import (
    ConfigError,
    DivergenceError,
    HalflineError,
    IterationLimitError,
    ReportMismatchError,
    UniquenessError,
)
from .kernels import (
    KernelSpec,
    KernelValidationReport,
    kernel_cdf,
    kernel_from_config,
    make_gaussian_kernel,
    make_quartic_kernel,
    validate_kernel,
)
from .nonlinear import (
    NonlinearProblem,
    NonlinearSolution,
    cross_start_check,
    moment_tail_check,
    perturbation_envelope_ratio,
    solve_lower_auxiliary,
    solve_nonlinear,
    solve_upper_auxiliary,
)
from .nonlinearities import (
    OMEGA_BOUNDED,
    OMEGA_SUBLINEAR,
    OmegaSpec,
    QSpec,
    inverse_by_bisection,
    make_omega,
    make_power_q,
    make_sqrt_family_q,
    make_zero_omega,
    omega_from_config,
    q_from_config,
    validate_omega,
    validate_q,
)
from .quadrature import (
    Grid,
    Profile,
    TailModel,
    apply_sum_difference,
    apply_weighted_sum_difference,
    apply_wiener_hopf,
    build_grid,
    derivative_moment,
)
from .quasilinear import (
    QuasilinearProblem,
    QuasilinearSolution,
    build_free_term,
    default_linear_stop,
    solve_linear_psi,
    solve_quasilinear,
    solve_wiener_hopf_majorant,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # exceptions
    "HalflineError",
    "IterationLimitError",
    "DivergenceError",
    "UniquenessError",
    "ConfigError",
    "ReportMismatchError",
    # kernels
    "KernelSpec",
    "KernelValidationReport",
    "make_gaussian_kernel",
    "make_quartic_kernel",
    "kernel_from_config",
    "kernel_cdf",
    "validate_kernel",
    # nonlinearities
    "QSpec",
    "OmegaSpec",
    "OMEGA_BOUNDED",
    "OMEGA_SUBLINEAR",
    "make_power_q",
    "make_sqrt_family_q",
    "make_omega",
    "make_zero_omega",
    "inverse_by_bisection",
    "validate_q",
    "validate_omega",
    "q_from_config",
    "omega_from_config",
    # quadrature
    "Grid",
    "Profile",
    "TailModel",
    "build_grid",
    "apply_sum_difference",
    "apply_weighted_sum_difference",
    "apply_wiener_hopf",
    "derivative_moment",
    # constants
    "Constants",
    "bisect_root",
    "compute_M",
    "compute_eta",
    "compute_xi",
    "compute_rate_k",
    "finalize_constants",
    # quasilinear
    "QuasilinearProblem",
    "QuasilinearSolution",
    "default_linear_stop",
    "build_free_term",
    "solve_linear_psi",
    "solve_wiener_hopf_majorant",
    "solve_quasilinear",
    # nonlinear
    "NonlinearProblem",
    "NonlinearSolution",
    "solve_lower_auxiliary",
    "solve_upper_auxiliary",
    "solve_nonlinear",
    "perturbation_envelope_ratio",
    "cross_start_check",
    "moment_tail_check",
    # diagnostics
    "StoppingCriteria",
    "IterationTrace",
    "ReportSection",
    "RunReport",
    "fit_geometric_rate",
    "compose_report",
]
