"""
Problem operators F and linear kernels v.

An operator is either affine, ``F(x) = A x - b``, or a general single-valued
map with an optional analytic Jacobian. Kernels are always linear,
``v(x) = B x``.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NonFinite

FD_STEP = np.sqrt(np.finfo(float).eps)
JACOBIAN_CHECK_POINTS = 20
JACOBIAN_CHECK_RTOL = 1e-4

KERNEL_PROVENANCE = (
    "user",
    "identity",
    "perturbation",
    "symmetric",
    "factored",
    "local_jacobian",
)


@dataclass(frozen=True)
class AffineOperator:
    """``F(x) = A x - b`` with square ``A``."""

    A: np.ndarray
    b: np.ndarray
    name: str = "affine"

    def __post_init__(self):
        A = linalg.as_mat(self.A, "A")
        b = linalg.as_vec(self.b, "b")
        if A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
            raise DimensionMismatch(f"A {A.shape} and b {b.shape} are inconsistent")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def dimension(self):
        return self.b.shape[0]

    def __call__(self, x):
        return self.A @ x - self.b

    def jacobian(self, x):
        return self.A


@dataclass(frozen=True)
class NonlinearOperator:
    """A single-valued map R^n -> R^n.

    If ``jacobian`` is supplied it is checked against central differences at
    20 seeded points when the operator is constructed.
    """

    dimension: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    lipschitz_hint: Optional[float] = None
    name: str = "nonlinear"
    check_jacobian: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise DimensionMismatch("dimension must be positive")
        if self.lipschitz_hint is not None and not self.lipschitz_hint > 0:
            raise ValueError("lipschitz_hint must be positive")
        if self.jacobian is not None and self.check_jacobian:
            _validate_jacobian(self)

    def __call__(self, x):
        return np.asarray(self.evaluator(x), dtype=float).reshape(self.dimension)


Operator = Union[AffineOperator, NonlinearOperator]


@dataclass(frozen=True)
class KernelSpec:
    """Linear kernel ``v(x) = B x`` together with how ``B`` was obtained."""

    B: np.ndarray
    provenance: str = "user"
    tau: Optional[float] = None

    def __post_init__(self):
        B = linalg.as_mat(self.B, "B")
        if B.shape[0] != B.shape[1]:
            raise DimensionMismatch(f"kernel must be square, got {B.shape}")
        if self.provenance not in KERNEL_PROVENANCE:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "B", B)

    @property
    def dimension(self):
        return self.B.shape[0]

    def __call__(self, x):
        return self.B @ x

    def lipschitz(self):
        """Lipschitz constant of v, i.e. the spectral norm of B."""
        return linalg.norm_2(self.B)


def identity_kernel(n):
    return KernelSpec(np.eye(n), "identity")


def evaluate(F, x):
    """Evaluate ``F`` at ``x``, rejecting dimension errors and non-finite output."""
    x = linalg.as_vec(x, "x")
    if x.shape[0] != F.dimension:
        raise DimensionMismatch(f"x has length {x.shape[0]}, operator expects {F.dimension}")
    out = F(x)
    if not np.all(np.isfinite(out)):
        raise NonFinite(f"operator {F.name!r} returned non-finite values at {x}")
    return out


def jacobian_fd(F, x):
    """Central-difference Jacobian with step ``sqrt(eps) * max(1, |x_j|)``."""
    x = linalg.as_vec(x, "x")
    n = x.shape[0]
    J = np.empty((n, n))
    for j in range(n):
        h = FD_STEP * max(1.0, abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        J[:, j] = (evaluate(F, xp) - evaluate(F, xm)) / (xp[j] - xm[j])
    return J


def jacobian(F, x):
    """Analytic Jacobian when available, finite differences otherwise."""
    if isinstance(F, AffineOperator):
        return F.A
    if F.jacobian is not None:
        J = np.asarray(F.jacobian(linalg.as_vec(x)), dtype=float).reshape(F.dimension, F.dimension)
        if not np.all(np.isfinite(J)):
            raise NonFinite(f"Jacobian of {F.name!r} is non-finite at {x}")
        return J
    return jacobian_fd(F, x)


def _validate_jacobian(F):
    rng = np.random.default_rng(0)
    for _ in range(JACOBIAN_CHECK_POINTS):
        x = rng.standard_normal(F.dimension)
        Ja = np.asarray(F.jacobian(x), dtype=float).reshape(F.dimension, F.dimension)
        Jf = jacobian_fd(F, x)
        if linalg.norm_max(Ja - Jf) > JACOBIAN_CHECK_RTOL * max(1.0, linalg.norm_max(Ja)):
            raise ValueError(
                f"analytic Jacobian of {F.name!r} disagrees with finite differences at {x}"
            )


def estimate_lipschitz(F, lower, upper, samples=50, seed=0):
    """Upper-bound estimate of the Lipschitz constant of F on a box.

    Returns ``lipschitz_hint`` when the operator carries one. Otherwise takes
    the largest spectral norm of the Jacobian over ``samples`` seeded points.
    """
    if isinstance(F, AffineOperator):
        return linalg.norm_2(F.A)
    if F.lipschitz_hint is not None:
        return float(F.lipschitz_hint)
    lower = linalg.as_vec(lower, "lower")
    upper = linalg.as_vec(upper, "upper")
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        x = rng.uniform(lower, upper)
        best = max(best, linalg.norm_2(jacobian(F, x)))
    return best
