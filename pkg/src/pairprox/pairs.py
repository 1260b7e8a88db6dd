"""
Certify, refute and construct monotone operator pairs.

A pair of linear maps (A, B) is monotone exactly when the symmetric part of
``A^T B`` is positive semidefinite, so linear pairs are decided by an
eigenvalue test. Nonlinear pairs can only be refuted by sampling.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg
from .errors import DimensionMismatch, HypothesisViolated, SingularJacobian, SingularMatrix
from .operators import KernelSpec, evaluate, jacobian

PSD_RTOL = 1e-8
ZERO_RTOL = 1e-10
SAMPLED_NEG_TOL = 1e-10

MONOTONE = "monotone"
STRONGLY_MONOTONE = "strongly_monotone"
NOT_MONOTONE = "not_monotone"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class PairCertificate:
    status: str
    lambda_min: float
    method: str  # "psd_exact" or "sampled"
    scale: float = 1.0
    beta: Optional[float] = None
    witness: Optional[np.ndarray] = None
    witness_pair: Optional[tuple] = None
    samples: int = 0

    @property
    def is_monotone(self):
        return self.status in (MONOTONE, STRONGLY_MONOTONE)

    def describe(self):
        lines = [f"status: {self.status}", f"lambda_min: {self.lambda_min:.17g}", f"method: {self.method}"]
        if self.beta is not None:
            lines.append(f"beta: {self.beta:.17g}")
        if self.witness is not None:
            lines.append("witness: " + " ".join(f"{w:.17g}" for w in self.witness))
        if self.witness_pair is not None:
            x, y = self.witness_pair
            lines.append("witness_x: " + " ".join(f"{w:.17g}" for w in x))
            lines.append("witness_y: " + " ".join(f"{w:.17g}" for w in y))
        if self.method == "sampled":
            lines.append(f"samples: {self.samples}")
        return "\n".join(lines)


def _pair_tol(scale):
    return max(PSD_RTOL * scale, linalg.ABS_FLOOR)


def quadratic_pair_value(A, B, z):
    """``z^T A^T B z = <A z, B z>``."""
    return float((A @ z) @ (B @ z))


def certify_linear_pair(A, B):
    """Decide monotonicity of the linear pair (A, B) from ``sym(A^T B)``."""
    A = linalg.as_mat(A, "A")
    B = linalg.as_mat(B, "B")
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A {A.shape} and B {B.shape} must be square and equal-sized")
    M = A.T @ B
    scale = linalg.norm_max(M)
    eig = linalg.sym_eig(linalg.sym_part(M))
    lam = float(eig.eigenvalues[-1])
    tol = _pair_tol(scale)
    if lam > tol:
        return PairCertificate(STRONGLY_MONOTONE, lam, "psd_exact", scale, beta=lam)
    if lam >= -tol:
        return PairCertificate(MONOTONE, lam, "psd_exact", scale)
    z = eig.eigenvectors[:, -1]
    z = z / np.linalg.norm(z)
    return PairCertificate(NOT_MONOTONE, lam, "psd_exact", scale, witness=z)


def construct_kernel_perturbation(A, A1, check=True):
    """Kernel ``B = A + A1`` for a perturbation with ``A1^T A`` monotone.

    Then ``<Ax, Bx> = |Ax|^2 + <A1^T A x, x> >= 0``. With ``check=False`` the
    hypothesis on ``A1`` is not verified.

    Raises
    ------
    HypothesisViolated
        ``sym(A1^T A)`` has a negative eigenvalue; carries the unit witness.
    """
    A = linalg.as_mat(A, "A")
    A1 = linalg.as_mat(A1, "A1")
    if A.shape != A1.shape or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A {A.shape} and A1 {A1.shape} must be square and equal-sized")
    if check:
        cert = certify_linear_pair(A1, A)
        if cert.status == NOT_MONOTONE:
            z = cert.witness
            raise HypothesisViolated(
                f"A1^T A is not monotone (lambda_min = {cert.lambda_min:.6g})",
                witness=z,
                value=quadratic_pair_value(A1, A, z),
            )
    return KernelSpec(A + A1, "perturbation")


def _replace_small(d, replacement, rtol=ZERO_RTOL):
    tau = rtol * max(1.0, float(np.max(np.abs(d))) if d.size else 0.0)
    out = d.copy()
    out[np.abs(d) <= tau] = replacement
    return out, tau


def construct_kernel_symmetric(A, replacement=1.0):
    """Kernel from the eigendecomposition of a symmetric ``A``.

    With ``A = O D O^T``, zero eigenvalues (``|d| <= 1e-10 max(1, max|d|)``)
    are replaced by ``replacement`` and ``B = O D' O^T``.
    """
    A = linalg.as_mat(A, "A")
    eig = linalg.sym_eig(A)
    O = eig.eigenvectors
    d_new, tau = _replace_small(eig.eigenvalues, replacement)
    B = O @ np.diag(d_new) @ O.T
    return KernelSpec(0.5 * (B + B.T), "symmetric", tau=tau)


def construct_kernel_factored(A, replacement=1.0):
    """Kernel from the factorisation ``A = C D E`` realised as an SVD.

    ``C = U`` and ``E = V^T`` are orthogonal, so ``(C^{-1})^T = U`` and
    ``B = U D' V^T``, where ``D'`` replaces the vanishing singular values by
    ``replacement``. Then ``A^T B = V (Sigma D') V^T`` is PSD.
    """
    A = linalg.as_mat(A, "A")
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be square, got {A.shape}")
    dec = linalg.svd(A)
    s_new, tau = _replace_small(dec.sigma, replacement)
    B = dec.U @ np.diag(s_new) @ dec.Vt
    return KernelSpec(B, "factored", tau=tau)


def certify_nonlinear_pair_sampled(f, kernel, lower, upper, samples=10_000, seed=0):
    """Search for a violation of pair monotonicity over random point pairs.

    Points are uniform in the box ``[lower, upper]``. A sampled pass can
    never prove monotonicity, so the best outcome is ``inconclusive`` with
    the empirical minimum of ``<f(x)-f(y), B(x-y)> / |x-y|^2`` stored in
    ``lambda_min``.
    """
    lower = linalg.as_vec(lower, "lower")
    upper = linalg.as_vec(upper, "upper")
    if lower.shape != upper.shape or np.any(lower >= upper):
        raise ValueError("box requires lower < upper componentwise")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    B = kernel.B
    best = np.inf
    for _ in range(samples):
        x = rng.uniform(lower, upper)
        y = rng.uniform(lower, upper)
        d = x - y
        dd = d @ d
        if dd == 0.0:
            continue
        val = (evaluate(f, x) - evaluate(f, y)) @ (B @ d)
        if val < -SAMPLED_NEG_TOL:
            return PairCertificate(
                NOT_MONOTONE, val / dd, "sampled", witness_pair=(x, y), samples=samples
            )
        best = min(best, val / dd)
    return PairCertificate(INCONCLUSIVE, float(best), "sampled", samples=samples)


@dataclass(frozen=True)
class LocalStrongMonotonicityEstimate:
    center: np.ndarray
    radius: float
    alpha_hat: float
    samples: int
    c: float  # smallest singular value of f'(center)
    kernel: KernelSpec

    @property
    def theoretical_floor(self):
        """``c^2 / 2``, the modulus guaranteed for a small enough radius."""
        return 0.5 * self.c ** 2


def sample_ball(rng, center, radius):
    n = center.shape[0]
    d = rng.standard_normal(n)
    d /= np.linalg.norm(d)
    return center + radius * rng.uniform() ** (1.0 / n) * d


def estimate_local_strong_monotonicity(f, center, radius, samples=10_000, seed=0):
    """Estimate the local strong monotonicity modulus of ``(f, f'(center))``.

    The kernel is ``v(x) = f'(center) x``. ``alpha_hat`` is the smallest
    sampled ratio ``<f(x)-f(y), v(x)-v(y)> / |x-y|^2`` over pairs in the
    ball, which can only over-estimate the true infimum.

    Raises
    ------
    SingularJacobian
        ``f'(center)`` fails the LU pivot test.
    """
    center = linalg.as_vec(center, "center")
    if not radius > 0:
        raise ValueError("radius must be positive")
    J = jacobian(f, center)
    try:
        linalg.lu_factor(J)
    except SingularMatrix as exc:
        raise SingularJacobian(f"f'(x*) is singular at {center}: {exc}") from exc
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    best = np.inf
    for _ in range(samples):
        x = sample_ball(rng, center, radius)
        y = sample_ball(rng, center, radius)
        d = x - y
        dd = d @ d
        if dd == 0.0:
            continue
        best = min(best, (evaluate(f, x) - evaluate(f, y)) @ (J @ d) / dd)
    c = float(linalg.svd(J).sigma[-1])
    return LocalStrongMonotonicityEstimate(
        center, float(radius), float(best), samples, c, KernelSpec(J, "local_jacobian")
    )
