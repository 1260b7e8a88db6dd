"""
Dense linear algebra on small real matrices.

Solves use LU with partial pivoting; the symmetric eigendecomposition uses
cyclic Jacobi rotations and the SVD uses one-sided (Hestenes) Jacobi. Numpy
supplies storage and elementwise arithmetic only.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NonFinite, NotSymmetric, SingularMatrix

PIVOT_RTOL = 1e-12
SYMMETRY_RTOL = 1e-10
JACOBI_RTOL = 1e-12
SVD_COS_TOL = 1e-14
MAX_SWEEPS = 50
ABS_FLOOR = 1e-14


def as_mat(A, name="matrix"):
    """Return ``A`` as a finite 2-D float array (copy-free when possible)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite(f"{name} has non-finite entries")
    return A


def as_vec(x, name="vector"):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFinite(f"{name} has non-finite entries")
    return x


def _square(A, name="matrix"):
    A = as_mat(A, name)
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    return A


# -- norms and products ------------------------------------------------------

def norm_max(A):
    A = np.asarray(A, dtype=float)
    return float(np.max(np.abs(A))) if A.size else 0.0


def norm_fro(A):
    return float(np.sqrt(np.sum(np.asarray(A, dtype=float) ** 2)))


def norm_2(A):
    """Spectral norm, computed from the Jacobi SVD."""
    A = as_mat(A)
    if A.size == 0:
        return 0.0
    return float(svd(A).sigma[0])


def matmul(A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[-1] != B.shape[0]:
        raise DimensionMismatch(f"cannot multiply shapes {A.shape} and {B.shape}")
    return A @ B


def sym_part(A):
    A = _square(A)
    return 0.5 * (A + A.T)


# -- LU ----------------------------------------------------------------------

@dataclass(frozen=True)
class LUFactors:
    """Packed LU factors with the row permutation applied to the input."""

    lu: np.ndarray
    perm: np.ndarray
    sign: float


def lu_factor(A):
    """LU factorisation with partial pivoting.

    Raises
    ------
    SingularMatrix
        If a pivot magnitude is at most ``1e-12 * max|A|``.
    """
    A = _square(A)
    n = A.shape[0]
    scale = norm_max(A)
    thresh = PIVOT_RTOL * scale
    lu = A.copy()
    perm = np.arange(n)
    sign = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= thresh or scale == 0.0:
            raise SingularMatrix(
                f"pivot {k} has magnitude {abs(lu[p, k]):.3e} <= {thresh:.3e}",
                pivot_index=k,
            )
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return LUFactors(lu, perm, sign)


def lu_solve_factored(factors, rhs):
    lu, perm = factors.lu, factors.perm
    rhs = as_vec(rhs, "rhs")
    n = lu.shape[0]
    if rhs.shape[0] != n:
        raise DimensionMismatch(f"rhs has length {rhs.shape[0]}, expected {n}")
    x = rhs[perm].copy()
    for i in range(n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


def lu_solve(A, rhs):
    """Solve ``A x = rhs`` by LU with partial pivoting."""
    A = _square(A)
    rhs = as_vec(rhs, "rhs")
    if rhs.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"rhs has length {rhs.shape[0]}, expected {A.shape[0]}")
    return lu_solve_factored(lu_factor(A), rhs)


def det(A):
    """Determinant from the LU pivots; zero pivots give exactly zero."""
    A = _square(A)
    n = A.shape[0]
    if n == 0:
        return 1.0
    lu = A.copy()
    sign = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if lu[p, k] == 0.0:
            return 0.0
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            sign = -sign
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return float(sign * np.prod(np.diag(lu)))


# -- symmetric eigendecomposition ---------------------------------------------

@dataclass(frozen=True)
class EigDecomp:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns paired with eigenvalues


def _descending(values):
    # stable sort keeps original index order on ties
    return np.argsort(-values, kind="stable")


def sym_eig(A):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Symmetric up to ``1e-10 * max|A|``; it is symmetrised before use.

    Returns
    -------
    EigDecomp
        Eigenvalues in descending order and orthonormal eigenvectors as columns.
    """
    A = _square(A)
    n = A.shape[0]
    scale = norm_max(A)
    if norm_max(A - A.T) > SYMMETRY_RTOL * scale:
        raise NotSymmetric(f"asymmetry {norm_max(A - A.T):.3e} exceeds tolerance")
    S = 0.5 * (A + A.T)
    V = np.eye(n)
    tol = max(JACOBI_RTOL * norm_fro(S), ABS_FLOOR)
    for _ in range(MAX_SWEEPS + 1):
        off = np.abs(S - np.diag(np.diag(S)))
        if n < 2 or off.max() <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = S[p, q]
                if abs(apq) <= 0.1 * tol:
                    continue
                tau = (S[q, q] - S[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, tau) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                Sp, Sq = S[:, p].copy(), S[:, q].copy()
                S[:, p] = c * Sp - s * Sq
                S[:, q] = s * Sp + c * Sq
                Sp, Sq = S[p, :].copy(), S[q, :].copy()
                S[p, :] = c * Sp - s * Sq
                S[q, :] = s * Sp + c * Sq
                S[p, q] = S[q, p] = 0.0
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    else:
        raise NoConvergence(f"Jacobi eigenvalue iteration did not converge in {MAX_SWEEPS} sweeps")
    w = np.diag(S).copy()
    order = _descending(w)
    return EigDecomp(w[order], V[:, order])


def min_sym_eigenvalue(A):
    """Smallest eigenvalue of the symmetric part ``(A + A^T)/2``."""
    return float(sym_eig(sym_part(A)).eigenvalues[-1])


# -- singular value decomposition ---------------------------------------------

@dataclass(frozen=True)
class SvdDecomp:
    U: np.ndarray
    sigma: np.ndarray  # descending, nonnegative
    Vt: np.ndarray


def _complete_orthonormal(U, keep):
    """Replace columns of ``U`` not flagged in ``keep`` by an orthonormal complement."""
    m, k = U.shape
    basis = [U[:, j] for j in range(k) if keep[j]]
    out = U.copy()
    candidates = iter(np.eye(m))
    for j in range(k):
        if keep[j]:
            continue
        for e in candidates:
            w = e.copy()
            for _ in range(2):  # re-orthogonalise once for stability
                for b in basis:
                    w -= (b @ w) * b
            nw = np.linalg.norm(w)
            if nw > 1e-8:
                w /= nw
                basis.append(w)
                out[:, j] = w
                break
    return out


def svd(A):
    """Thin SVD by one-sided Jacobi rotations.

    For ``A`` of shape (m, n) with k = min(m, n), returns ``U`` (m, k),
    ``sigma`` (k,) and ``Vt`` (k, n) with ``A = U diag(sigma) Vt``. Square
    inputs therefore get orthogonal ``U`` and ``Vt``; columns of ``U`` that
    belong to vanishing singular values are completed to an orthonormal set.
    """
    A = as_mat(A)
    m, n = A.shape
    if m < n:
        t = svd(A.T)
        return SvdDecomp(t.Vt.T, t.sigma, t.U.T)
    W = A.copy()
    V = np.eye(n)
    for _ in range(MAX_SWEEPS + 1):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = W[:, p] @ W[:, p]
                beta = W[:, q] @ W[:, q]
                gamma = W[:, p] @ W[:, q]
                if alpha == 0.0 or beta == 0.0:
                    continue
                if abs(gamma) <= SVD_COS_TOL * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                Wp, Wq = W[:, p].copy(), W[:, q].copy()
                W[:, p] = c * Wp - s * Wq
                W[:, q] = s * Wp + c * Wq
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
        if not rotated:
            break
    else:
        raise NoConvergence(f"one-sided Jacobi SVD did not converge in {MAX_SWEEPS} sweeps")
    sigma = np.sqrt(np.sum(W * W, axis=0))
    order = _descending(sigma)
    sigma, W, V = sigma[order], W[:, order], V[:, order]
    smax = sigma[0] if n else 0.0
    keep = sigma > max(n * np.finfo(float).eps * smax, 1e-300)
    U = np.zeros((m, n))
    U[:, keep] = W[:, keep] / sigma[keep]
    if not np.all(keep):
        U = _complete_orthonormal(U, keep)
    return SvdDecomp(U, sigma, V.T)
