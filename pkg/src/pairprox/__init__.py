"""Warped-resolvent solvers for inclusions with monotone operator pairs."""

from .errors import *  # noqa: F401,F403
from .operators import AffineOperator, KernelSpec, NonlinearOperator, identity_kernel
from .pairs import (
    certify_linear_pair,
    certify_nonlinear_pair_sampled,
    construct_kernel_factored,
    construct_kernel_perturbation,
    construct_kernel_symmetric,
    estimate_local_strong_monotonicity,
)
from .resolvent import fixed_point_residual, warped_resolvent
from .solvers import (
    QuasiNewtonConfig,
    Schedule,
    SolverConfig,
    gippa_run,
    newton_run,
    quasi_newton_run,
    validate_schedules,
)
from .trace import IterateTrace

__version__ = "0.1.0"
