"""
Warped resolvents ``J(y) = (gamma F + v)^{-1}(v(y))``.

For affine ``F`` this is one linear solve. For nonlinear ``F`` the inner
equation ``gamma f(x) + B x = B y`` is solved by damped Newton.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InnerNoConvergence, InnerSingular, SingularMatrix
from .operators import AffineOperator, evaluate, jacobian

GAMMA_RETRY_FACTOR = 1.0 + 1e-6


@dataclass(frozen=True)
class InnerSolverConfig:
    tol: float = 1e-12
    max_iters: int = 100
    min_damping: float = 2.0 ** -20

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


def resolvent_affine(A, b, B, gamma, y):
    """Solve ``(gamma A + B) x = B y + gamma b``.

    Raises ``SingularMatrix`` when ``gamma A + B`` is not injective.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return linalg.lu_solve(gamma * A + B, B @ y + gamma * b)


def resolvent_nonlinear(f, B, gamma, y, cfg=None, warm_start=None):
    """Solve ``gamma f(x) + B x = B y`` by backtracking Newton.

    Parameters
    ----------
    f : NonlinearOperator
    B : ndarray
        Kernel matrix.
    gamma : float
        Positive step size.
    y : ndarray
        Point at which the resolvent is evaluated.
    cfg : InnerSolverConfig, optional
    warm_start : ndarray, optional
        Starting guess; defaults to ``y``.

    Returns
    -------
    x : ndarray
        Point with ``|G(x)|_inf <= tol * max(1, |B y|_inf)``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    cfg = cfg or InnerSolverConfig()
    y = linalg.as_vec(y, "y")
    By = B @ y
    target = cfg.tol * max(1.0, float(np.max(np.abs(By))))
    x = linalg.as_vec(y if warm_start is None else warm_start, "warm_start").copy()

    def G(z):
        return gamma * evaluate(f, z) + B @ z - By

    g = G(x)
    gnorm = float(np.max(np.abs(g)))
    for _ in range(cfg.max_iters):
        if gnorm <= target:
            return x
        try:
            d = linalg.lu_solve(gamma * jacobian(f, x) + B, -g)
        except SingularMatrix as exc:
            raise InnerSingular(f"inner Newton Jacobian singular at {x}: {exc}") from exc
        t = 1.0
        while True:
            x_try = x + t * d
            g_try = G(x_try)
            n_try = float(np.max(np.abs(g_try)))
            if n_try < gnorm or n_try <= target:
                break
            t *= 0.5
            if t < cfg.min_damping:
                raise InnerNoConvergence(
                    f"backtracking exhausted at residual {gnorm:.3e} (target {target:.3e})"
                )
        x, g, gnorm = x_try, g_try, n_try
    if gnorm <= target:
        return x
    raise InnerNoConvergence(
        f"inner Newton stopped after {cfg.max_iters} iterations at residual {gnorm:.3e}"
    )


def warped_resolvent(F, kernel, gamma, y, cfg=None, warm_start=None):
    """Evaluate ``J^v_{gamma F}(y)`` for either kind of operator."""
    y = linalg.as_vec(y, "y")
    if isinstance(F, AffineOperator):
        return resolvent_affine(F.A, F.b, kernel.B, gamma, y)
    return resolvent_nonlinear(F, kernel.B, gamma, y, cfg, warm_start)


def resolvent_equation_residual(F, kernel, gamma, y, x):
    """``|gamma F(x) + B x - B y|_inf``; zero exactly when x = J(y)."""
    return float(np.max(np.abs(gamma * evaluate(F, x) + kernel.B @ (x - y))))


def fixed_point_residual(F, kernel, gamma, x, cfg=None):
    """``|J^v_{gamma F}(x) - x|_inf``, which vanishes at zeros of F."""
    x = linalg.as_vec(x, "x")
    return float(np.max(np.abs(warped_resolvent(F, kernel, gamma, x, cfg, warm_start=x) - x)))
