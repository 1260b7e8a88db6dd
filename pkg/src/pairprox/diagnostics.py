"""
Numerical checks of convergence certificates on iterate traces.

Every check is a pure function of (trace, kernel, reference point). With
``a_n = |v(x_n) - v(x*)|^2`` and ``delta_n = |v(x_n) - v(x_{n-1})|^2``:

* the energy inequality
  ``a_{n+1} - a_n - alpha_n (a_n - a_{n-1})
  <= (alpha_n - 1) delta_{n+1} + 2 alpha_n delta_n``
  holds whenever (F, v) is monotone, so a violation witnesses a
  non-monotone pair along the trajectory;
* ``sum delta_n`` is finite for alpha nondecreasing below 1/3;
* for a beta-strongly monotone pair,
  ``|v(x_{n+1}) - v(x*)| <= kappa |v(y_n) - v(x*)|`` with
  ``kappa = 1 / (1 + beta gamma / L^2)``.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import linalg
from .errors import MissingReference, NonPositive
from .operators import evaluate

LEMMA_RTOL = 1e-10
RATIO_DENOM_FLOOR = 1e-14
RATE_ZERO_FLOOR = 1e-15


def _reference(trace, x_star):
    if x_star is None:
        x_star = trace.reference
    if x_star is None:
        raise MissingReference("a reference solution x* is required")
    return linalg.as_vec(x_star, "x_star")


@dataclass
class CertificateReport:
    lemma41_violations: List[Tuple[int, float]] = field(default_factory=list)
    lemma41_slacks: Optional[np.ndarray] = None
    delta_partial_sums: Optional[np.ndarray] = None
    delta_tail: Optional[float] = None
    contraction_ratios: List[Tuple[int, float]] = field(default_factory=list)
    kappa_bound: Optional[float] = None
    global_rate: Optional[float] = None

    @property
    def max_ratio(self):
        return max((r for _, r in self.contraction_ratios), default=None)

    def to_lines(self):
        """``key: value`` lines; list-valued fields are summarised."""
        out = []
        if self.lemma41_slacks is not None:
            out.append(f"lemma41_checked: {len(self.lemma41_slacks)}")
            out.append(f"lemma41_violations: {len(self.lemma41_violations)}")
            if len(self.lemma41_slacks):
                out.append(f"lemma41_max_slack: {float(np.max(self.lemma41_slacks)):.17g}")
        if self.delta_partial_sums is not None:
            total = float(self.delta_partial_sums[-1]) if len(self.delta_partial_sums) else 0.0
            out.append(f"delta_sum: {total:.17g}")
            out.append(f"delta_tail: {self.delta_tail:.17g}")
        if self.kappa_bound is not None:
            out.append(f"kappa_bound: {self.kappa_bound:.17g}")
            mr = self.max_ratio
            out.append(f"contraction_max_ratio: {'' if mr is None else format(mr, '.17g')}")
            out.append(f"contraction_ratios_checked: {len(self.contraction_ratios)}")
        if self.global_rate is not None:
            out.append(f"global_rate_rho: {self.global_rate:.17g}")
            out.append(f"global_rate_below_one: {self.global_rate < 1.0}")
        return out


def check_lemma41(trace, kernel, x_star=None, F=None):
    """Evaluate the energy inequality at every interior step of an inertial trace.

    Returns a report whose ``lemma41_slacks[k]`` is ``lhs - rhs`` for record
    ``k + 1``; entries above ``1e-10 max(1, a_n)`` are listed as violations.
    Passing ``F`` checks that ``x_star`` really is a zero.
    """
    xs_ = _reference(trace, x_star)
    if F is not None:
        res = float(np.max(np.abs(evaluate(F, xs_))))
        if res > 1e-8:
            raise ValueError(f"x_star is not a zero of F (residual {res:.3e})")
    B = kernel.B
    X = trace.iterates
    vX = X @ B.T
    v_star = B @ xs_
    a = np.sum((vX - v_star) ** 2, axis=1)
    delta = np.concatenate([[0.0], np.sum(np.diff(vX, axis=0) ** 2, axis=1)])
    slacks = []
    violations = []
    for rec in trace.records:
        n = rec.n
        if n + 1 >= len(X):
            break
        lhs = a[n + 1] - a[n] - rec.alpha * (a[n] - a[n - 1])
        rhs = (rec.alpha - 1.0) * delta[n + 1] + 2.0 * rec.alpha * delta[n]
        slack = float(lhs - rhs)
        slacks.append(slack)
        if slack > LEMMA_RTOL * max(1.0, a[n]):
            violations.append((n, slack))
    return CertificateReport(lemma41_violations=violations, lemma41_slacks=np.array(slacks))


def check_summability(trace, kernel):
    """Partial sums of ``delta_n`` and the tail beyond half the horizon."""
    X = trace.iterates
    if len(X) < 2:
        raise ValueError("trace needs at least two iterates")
    vX = X @ kernel.B.T
    delta = np.sum(np.diff(vX, axis=0) ** 2, axis=1)
    partial = np.cumsum(delta)
    tail = float(np.sum(delta[len(delta) // 2 + 1:]))
    return CertificateReport(delta_partial_sums=partial, delta_tail=tail)


def kappa_bound(beta, gamma_inf, lipschitz):
    return 1.0 / (1.0 + beta * gamma_inf / lipschitz ** 2)


def theoretical_global_rate(kappa, alpha):
    """``rho = sqrt(kappa^2 (1 + 5 alpha) + alpha_t)`` with ``alpha_t = (1 - kappa^2)/2``.

    Returns ``(rho, alpha_t, valid)``; ``valid`` requires ``rho < 1`` and
    ``3 kappa^2 alpha / rho^2 <= alpha_t``.
    """
    alpha_t = 0.5 * (1.0 - kappa ** 2)
    rho_sq = kappa ** 2 * (1.0 + 5.0 * alpha) + alpha_t
    rho = math.sqrt(rho_sq)
    valid = rho < 1.0 and 3.0 * kappa ** 2 * alpha / rho_sq <= alpha_t
    return rho, alpha_t, valid


def check_contraction(trace, kernel, x_star, beta, gamma_inf, lipschitz=None, alpha_cap=None):
    """Per-step ratios ``|v(x_{n+1}) - v(x*)| / |v(y_n) - v(x*)|`` against kappa.

    ``lipschitz`` defaults to the spectral norm of the kernel. Steps whose
    denominator is below 1e-14 are skipped.
    """
    if not beta > 0:
        raise ValueError("beta must be positive (strongly monotone pair required)")
    if not gamma_inf > 0:
        raise ValueError("gamma_inf must be positive")
    xs_ = _reference(trace, x_star)
    B = kernel.B
    L = kernel.lipschitz() if lipschitz is None else float(lipschitz)
    v_star = B @ xs_
    ratios = []
    for rec in trace.records:
        den = float(np.linalg.norm(B @ rec.y - v_star))
        if den <= RATIO_DENOM_FLOOR:
            continue
        ratios.append((rec.n, float(np.linalg.norm(B @ rec.x_new - v_star)) / den))
    kappa = kappa_bound(beta, gamma_inf, L)
    rho = None
    if alpha_cap is not None:
        rho = theoretical_global_rate(kappa, alpha_cap)[0]
    return CertificateReport(contraction_ratios=ratios, kappa_bound=kappa, global_rate=rho)


def estimate_linear_rate(series):
    """Fit ``series_n ~ C rho^n`` by least squares on the last half.

    The series is first cut at its first entry ``<= 1e-15``.

    Returns
    -------
    rho_hat : float
    r_squared : float
    """
    s = np.asarray(series, dtype=float)
    if s.ndim != 1 or len(s) < 5:
        raise ValueError("series needs at least 5 entries")
    small = np.nonzero(~(s > RATE_ZERO_FLOOR))[0]
    if len(small):
        s = s[: small[0]]
    if len(s) < 4:
        raise NonPositive(f"only {len(s)} entries remain above {RATE_ZERO_FLOOR:g}")
    n = np.arange(len(s), dtype=float)
    start = len(s) // 2
    x, y = n[start:], np.log(s[start:])
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - fit) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(np.exp(slope)), r2


def distance_to_solution_set(A, b, x):
    """Distance from ``x`` to ``{z : A z = b}`` for a consistent system.

    Uses the pseudo-inverse built from the Jacobi SVD.
    """
    dec = linalg.svd(A)
    tol = 1e-10 * max(1.0, float(dec.sigma[0]))
    inv = np.where(dec.sigma > tol, 1.0 / np.where(dec.sigma > tol, dec.sigma, 1.0), 0.0)
    r = A @ x - b
    return float(np.linalg.norm(dec.Vt.T @ (inv * (dec.U.T @ r))))
