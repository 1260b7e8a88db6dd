"""
Outer iterations.

``gippa_run`` is the inertial warped-resolvent iteration

    y_n     = x_n + alpha_n (x_n - x_{n-1})
    x_{n+1} = (gamma_n F + v)^{-1}(v(y_n))

which is GPPA when ``alpha_n = 0`` and the classical proximal point method
when additionally ``v`` is the identity. ``quasi_newton_run`` freezes the
Jacobian at a reference point; ``newton_run`` refactorises every step.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .errors import (
    LeftNeighborhood,
    NoConvergence,
    ResolventError,
    ResolventFailure,
    ScheduleInvalid,
    ScheduleWarning,
    SingularJacobian,
    SingularMatrix,
)
from .operators import estimate_lipschitz, evaluate, jacobian
from .pairs import estimate_local_strong_monotonicity
from .resolvent import GAMMA_RETRY_FACTOR, InnerSolverConfig, warped_resolvent
from .trace import IterateRecord, IterateTrace

logger = logging.getLogger(__name__)

ALPHA_THEORY_CAP = 1.0 / 3.0


@dataclass(frozen=True)
class Schedule:
    """Parameter sequence indexed by n >= 0.

    kinds: ``constant`` (c), ``offset_inverse`` (a + b/(n + c)) and
    ``capped_ramp`` (min(cap, n/(n + c))).
    """

    kind: str
    c: float = 0.0
    a: float = 0.0
    b: float = 0.0
    cap: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "offset_inverse", "capped_ramp"):
            raise ScheduleInvalid(f"unknown schedule kind {self.kind!r}")

    @classmethod
    def constant(cls, c):
        return cls("constant", c=float(c))

    @classmethod
    def offset_inverse(cls, a, b, c):
        return cls("offset_inverse", a=float(a), b=float(b), c=float(c))

    @classmethod
    def capped_ramp(cls, cap, c):
        return cls("capped_ramp", cap=float(cap), c=float(c))

    def __call__(self, n):
        if self.kind == "constant":
            return self.c
        if self.kind == "offset_inverse":
            return self.a + self.b / (n + self.c)
        return min(self.cap, n / (n + self.c))

    def label(self):
        if self.kind == "constant":
            return f"{self.c:g}"
        if self.kind == "offset_inverse":
            return f"{self.a:g}+{self.b:g}/(n+{self.c:g})"
        return f"min({self.cap:g},n/(n+{self.c:g}))"

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "c": self.c}
        if self.kind == "offset_inverse":
            return {"kind": "offset_inverse", "a": self.a, "b": self.b, "c": self.c}
        return {"kind": "capped_ramp", "cap": self.cap, "c": self.c}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind", None)
        try:
            if kind == "constant":
                return cls.constant(d["c"] if "c" in d else d["value"])
            if kind == "offset_inverse":
                return cls.offset_inverse(d["a"], d["b"], d["c"])
            if kind == "capped_ramp":
                return cls.capped_ramp(d["cap"], d["c"])
        except KeyError as exc:
            raise ScheduleInvalid(f"schedule {kind!r} is missing parameter {exc}") from None
        raise ScheduleInvalid(f"unknown schedule kind {kind!r}")


@dataclass(frozen=True)
class SolverConfig:
    gamma: Schedule
    alpha: Schedule
    x0: np.ndarray
    x1: np.ndarray
    tol_step: float = 1e-10
    tol_residual: float = 1e-10
    max_iter: int = 10_000
    inner: InnerSolverConfig = field(default_factory=InnerSolverConfig)

    def __post_init__(self):
        if not (self.tol_step > 0 and self.tol_residual > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        x0 = linalg.as_vec(self.x0, "x0")
        x1 = linalg.as_vec(self.x1, "x1")
        if x0.shape != x1.shape:
            raise ValueError("x0 and x1 must have equal length")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "x1", x1)


@dataclass(frozen=True)
class ScheduleValidation:
    alpha_nondecreasing: bool
    alpha_cap: float
    gamma_inf: float
    theory_satisfied: bool


def validate_schedules(cfg):
    """Check the schedules against the convergence theory on ``[0, max_iter]``.

    The theory needs alpha nondecreasing with ``sup alpha < 1/3`` and
    ``inf gamma > 0``. A failed check is reported, not raised.
    """
    ns = range(cfg.max_iter + 1)
    alphas = np.array([cfg.alpha(n) for n in ns], dtype=float)
    gammas = np.array([cfg.gamma(n) for n in ns], dtype=float)
    nondecreasing = bool(np.all(np.diff(alphas) >= 0.0))
    cap = float(alphas.max())
    ginf = float(gammas.min())
    ok = nondecreasing and cap < ALPHA_THEORY_CAP and ginf > 0.0
    return ScheduleValidation(nondecreasing, cap, ginf, ok)


def _check_schedule_values(n, gamma, alpha):
    if not (math.isfinite(gamma) and gamma > 0):
        raise ScheduleInvalid(f"gamma_{n} = {gamma!r} is not a positive finite number")
    if not (math.isfinite(alpha) and 0.0 <= alpha <= 1.0):
        raise ScheduleInvalid(f"alpha_{n} = {alpha!r} lies outside [0, 1]")


def _resolvent_step(F, kernel, gamma, y, cfg, warm_start, n):
    try:
        return warped_resolvent(F, kernel, gamma, y, cfg.inner, warm_start), gamma
    except SingularMatrix:
        # the singular set {gamma : det(gamma A + B) = 0} is finite
        retry = gamma * GAMMA_RETRY_FACTOR
        logger.info("gamma_%d = %g gives a singular resolvent; retrying with %.17g", n, gamma, retry)
        try:
            return warped_resolvent(F, kernel, retry, y, cfg.inner, warm_start), retry
        except (SingularMatrix, ResolventError) as exc:
            raise ResolventFailure(f"warped resolvent undefined at iteration {n}: {exc}", n) from exc
    except ResolventError as exc:
        raise ResolventFailure(f"warped resolvent failed at iteration {n}: {exc}", n) from exc


def gippa_run(F, kernel, cfg, reference=None):
    """Run the inertial warped-resolvent iteration.

    Stops when ``|x_{n+1} - y_n|_inf <= tol_step``, when
    ``|F(x_{n+1})|_inf <= tol_residual``, or after ``max_iter`` steps.

    Parameters
    ----------
    F : AffineOperator or NonlinearOperator
    kernel : KernelSpec
    cfg : SolverConfig
    reference : array_like, optional
        Known solution; only used to fill ``err_to_ref`` in the trace.

    Returns
    -------
    IterateTrace

    Raises
    ------
    ResolventFailure
        The resolvent could not be evaluated; ``exc.trace`` holds the partial trace.
    ScheduleInvalid
    """
    validation = validate_schedules(cfg)
    if not validation.theory_satisfied:
        warnings.warn(
            f"schedules outside the convergence theory (alpha nondecreasing="
            f"{validation.alpha_nondecreasing}, sup alpha={validation.alpha_cap:g}, "
            f"inf gamma={validation.gamma_inf:g})",
            ScheduleWarning,
            stacklevel=2,
        )
    if cfg.x0.shape[0] != F.dimension or kernel.dimension != F.dimension:
        raise ValueError("operator, kernel and start points have inconsistent dimensions")
    ref = None if reference is None else linalg.as_vec(reference, "reference")
    B = kernel.B
    trace = IterateTrace(x0=cfg.x0.copy(), x1=cfg.x1.copy(), reference=ref, method="gippa")
    x_prev, x = cfg.x0.copy(), cfg.x1.copy()
    for n in range(1, cfg.max_iter + 1):
        gamma, alpha = float(cfg.gamma(n)), float(cfg.alpha(n))
        _check_schedule_values(n, gamma, alpha)
        y = x + alpha * (x - x_prev)
        try:
            x_new, gamma = _resolvent_step(F, kernel, gamma, y, cfg, x, n)
        except ResolventFailure as exc:
            trace.termination = "error"
            exc.trace = trace
            raise
        dv = B @ (y - x_new)
        rec = IterateRecord(
            n=n, x=x, y=y, x_new=x_new, gamma=gamma, alpha=alpha,
            step_gap=float(np.max(np.abs(x_new - y))),
            v_gap=float(np.linalg.norm(dv)),
            residual=float(np.max(np.abs(evaluate(F, x_new)))),
            u_norm=float(np.max(np.abs(dv))) / gamma,
            err_to_ref=None if ref is None else float(np.linalg.norm(x_new - ref)),
        )
        trace.records.append(rec)
        if rec.step_gap <= cfg.tol_step:
            trace.termination = "step"
            break
        if rec.residual <= cfg.tol_residual:
            trace.termination = "residual"
            break
        x_prev, x = x, x_new
    else:
        trace.termination = "max_iter"
    logger.debug("gippa_run: %s after %d iterations", trace.termination, len(trace))
    return trace


@dataclass(frozen=True)
class QuasiNewtonConfig:
    reference_point: np.ndarray
    step: Optional[float] = None
    trust_radius: Optional[float] = None
    tol: float = 1e-12
    max_iter: int = 1000
    samples: int = 4000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "reference_point", linalg.as_vec(self.reference_point, "reference_point"))
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if self.trust_radius is not None and not self.trust_radius > 0:
            raise ValueError("trust_radius must be positive")


@dataclass(frozen=True)
class QuasiNewtonConstants:
    """Measured constants behind the default step ``h = alpha / L_f^2``."""

    alpha_hat: float
    lipschitz_f: float
    lipschitz_v: float  # smallest singular value of f'(x*)
    radius: float

    @property
    def step(self):
        return self.alpha_hat / self.lipschitz_f ** 2

    @property
    def contraction_bound(self):
        """``sqrt(1 - alpha^2 / (L_f^2 L_v^2))``."""
        q = 1.0 - self.alpha_hat ** 2 / (self.lipschitz_f ** 2 * self.lipschitz_v ** 2)
        return math.sqrt(max(q, 0.0))


def estimate_quasi_newton_constants(f, reference_point, radius, samples=4000, seed=0):
    """Estimate ``alpha``, ``L_f`` and ``L_v`` on the ball ``B(x*, radius)``."""
    ref = linalg.as_vec(reference_point, "reference_point")
    est = estimate_local_strong_monotonicity(f, ref, radius, samples=samples, seed=seed)
    if not est.alpha_hat > 0:
        raise ValueError(f"sampled local modulus {est.alpha_hat:g} is not positive; shrink the radius")
    lf = estimate_lipschitz(f, ref - radius, ref + radius, samples=max(50, samples // 40), seed=seed)
    return QuasiNewtonConstants(est.alpha_hat, lf, est.c, float(radius))


def _factor_jacobian(f, x, index):
    try:
        return linalg.lu_factor(jacobian(f, x))
    except SingularMatrix as exc:
        raise SingularJacobian(f"f' is singular at x = {x}: {exc}", index=index) from exc


def quasi_newton_run(f, cfg, x0):
    """``x_{k+1} = x_k - h f'(x*)^{-1} f(x_k)`` with the Jacobian frozen at x*.

    When ``cfg.step`` is omitted, ``h = alpha_hat / L_f^2`` from constants
    measured on a ball around x* (radius derived from ``trust_radius`` or
    twice the start distance). The trace's ``gamma`` column holds ``h``.
    """
    ref = cfg.reference_point
    x = linalg.as_vec(x0, "x0").copy()
    J_ref = jacobian(f, ref)
    factors = _factor_jacobian(f, ref, None)
    h = cfg.step
    if h is None:
        if cfg.trust_radius is not None:
            radius = cfg.trust_radius / linalg.svd(J_ref).sigma[-1]
        else:
            radius = max(2.0 * float(np.linalg.norm(x - ref)), 1e-3)
        h = estimate_quasi_newton_constants(f, ref, radius, cfg.samples, cfg.seed).step
    v_ref = J_ref @ ref
    trace = IterateTrace(x0=x.copy(), method="quasi_newton")
    for k in range(cfg.max_iter):
        x_new = x - h * linalg.lu_solve_factored(factors, evaluate(f, x))
        dv = J_ref @ (x - x_new)
        trace.records.append(IterateRecord(
            n=k + 1, x=x, y=x, x_new=x_new, gamma=h, alpha=0.0,
            step_gap=float(np.max(np.abs(x_new - x))),
            v_gap=float(np.linalg.norm(dv)),
            residual=float(np.max(np.abs(evaluate(f, x_new)))),
            u_norm=float(np.max(np.abs(dv))) / h,
        ))
        if cfg.trust_radius is not None and np.linalg.norm(J_ref @ x_new - v_ref) > cfg.trust_radius:
            trace.termination = "error"
            raise LeftNeighborhood(f"iterate {k + 1} left the trust region", index=k + 1, trace=trace)
        x = x_new
        if trace.records[-1].residual <= cfg.tol:
            trace.termination = "residual"
            return trace
    trace.termination = "max_iter"
    raise NoConvergence(f"quasi-Newton did not reach tol {cfg.tol:g} in {cfg.max_iter} steps", trace)


def newton_run(f, x0, h=1.0, tol=1e-12, max_iter=100):
    """Damped-step Newton ``x_{k+1} = x_k - h f'(x_k)^{-1} f(x_k)``.

    Raises ``SingularJacobian`` with ``index = k`` when ``f'(x_k)`` is singular.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x = linalg.as_vec(x0, "x0").copy()
    trace = IterateTrace(x0=x.copy(), method="newton")
    for k in range(max_iter):
        factors = _factor_jacobian(f, x, k)
        fx = evaluate(f, x)
        x_new = x - h * linalg.lu_solve_factored(factors, fx)
        trace.records.append(IterateRecord(
            n=k + 1, x=x, y=x, x_new=x_new, gamma=h, alpha=0.0,
            step_gap=float(np.max(np.abs(x_new - x))),
            v_gap=h * float(np.linalg.norm(fx)),
            residual=float(np.max(np.abs(evaluate(f, x_new)))),
            u_norm=float(np.max(np.abs(fx))),
        ))
        x = x_new
        if trace.records[-1].residual <= tol:
            trace.termination = "residual"
            return trace
    trace.termination = "max_iter"
    raise NoConvergence(f"Newton did not reach tol {tol:g} in {max_iter} steps", trace)
