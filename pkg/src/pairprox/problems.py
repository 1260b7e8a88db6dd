"""Built-in test problems and their published data."""

import numpy as np

from .operators import AffineOperator, KernelSpec, NonlinearOperator

EXAMPLE1_A = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]])
EXAMPLE1_B = np.array([14.0, 32.0, 50.0])
EXAMPLE1_SOLUTION = np.array([1.0, 2.0, 3.0])
EXAMPLE1_NULL_DIRECTION = np.array([1.0, -2.0, 1.0])
EXAMPLE1_V1 = np.array([[2.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]])
EXAMPLE1_V2 = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
EXAMPLE1_X0 = np.array([-0.5, -0.5, -0.5])
EXAMPLE1_X1 = np.array([0.7, 0.7, 0.7])

EXAMPLE2_A = np.diag([-1.0, 5.0, 9.0])
EXAMPLE2_X0 = np.array([2.0, -2.0, 1.0])
EXAMPLE2_X1 = np.array([1.5, -1.5, 0.5])
EXAMPLE2_APPROX_SOLUTION = np.array([-0.06, -0.195, -0.164])


def example1():
    return AffineOperator(EXAMPLE1_A, EXAMPLE1_B, name="example1")


def example1_kernel(which):
    B = {"v1": EXAMPLE1_V1, "v2": EXAMPLE1_V2}[which]
    return KernelSpec(B, "user")


def example2_g(x):
    return np.array([
        2.0 * np.sin(abs(x[2]) + x[1]),
        np.cos(abs(x[0]) - x[1]),
        2.0 * np.cos(x[1]) - 3.0 * np.sin(abs(x[2])),
    ])


def example2():
    """``f(x) = A x + g(x)`` with ``A = diag(-1, 5, 9)``.

    ``g`` contains ``|x_1|`` and ``|x_3|``, so no analytic Jacobian is
    registered; finite differences are used away from the kinks.
    """
    return NonlinearOperator(
        dimension=3,
        evaluator=lambda x: EXAMPLE2_A @ x + example2_g(x),
        name="example2",
    )


def example2_kernel():
    return KernelSpec(EXAMPLE2_A, "user")


BUILTINS = {
    "example1": example1,
    "example2": example2,
}


def get_builtin(name):
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown built-in problem {name!r}; known: {sorted(BUILTINS)}") from None
