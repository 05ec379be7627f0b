"""Dense least-squares kernels: QR solve, one-sided Jacobi SVD, Gram inverse.

All matrices are plain row-major ``numpy.ndarray`` of float64.  The QR-based
solver never forms (Z'Z) explicitly; downstream diagnostics reuse its
triangular factor through :func:`apply_gram_inverse`.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    InvalidInputError,
    NoConvergenceError,
    RankDeficientError,
)

RANK_TOL = 1e-12
JACOBI_MAX_SWEEPS = 30
JACOBI_OFF_TOL = 1e-12


def as_matrix(A, name="matrix"):
    """Validate and return a 2-d float64 array with finite entries."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-d, got ndim={A.ndim}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} contains NaN or Inf entries")
    return A


def as_vector(v, name="vector"):
    """Validate and return a 1-d float64 array with finite entries."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-d, got ndim={v.ndim}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} contains NaN or Inf entries")
    return v


@dataclass(frozen=True)
class LeastSquaresSolution:
    """Result of a QR least-squares solve.

    Attributes
    ----------
    coefficients : ndarray, shape (p,)
        Minimizer of ||y - Z b||_2.
    residuals : ndarray, shape (n,)
        y - Z @ coefficients.
    r_factor : ndarray, shape (p, p)
        Upper-triangular R from the Householder QR of Z, so that
        (Z'Z)^{-1} = R^{-1} R^{-T}.
    """

    coefficients: np.ndarray
    residuals: np.ndarray
    r_factor: np.ndarray


def _check_r_factor(R):
    d = np.abs(np.diag(R))
    dmax = d.max() if d.size else 0.0
    if dmax == 0.0 or d.min() < RANK_TOL * dmax:
        raise RankDeficientError(
            "triangular factor has a (near-)zero diagonal entry; "
            "the design is collinear or the subsample lost rank"
        )


def solve_ls(Z, y):
    """Solve min_b ||y - Z b||_2 via Householder QR.

    Parameters
    ----------
    Z : ndarray, shape (n, p) with n >= p
    y : ndarray, shape (n,)

    Returns
    -------
    LeastSquaresSolution

    Raises
    ------
    RankDeficientError
        If |r_jj| < 1e-12 * max_k |r_kk| for some diagonal entry of R.
    InvalidInputError
        On NaN/Inf entries or inconsistent shapes.
    """
    Z = as_matrix(Z, "Z")
    y = as_vector(y, "y")
    n, p = Z.shape
    if n < p:
        raise InvalidInputError(f"need n >= p, got n={n}, p={p}")
    if y.shape[0] != n:
        raise InvalidInputError(f"y has length {y.shape[0]}, expected {n}")
    Q, R = np.linalg.qr(Z)
    _check_r_factor(R)
    coef = solve_triangular(R, Q.T @ y)
    return LeastSquaresSolution(coef, y - Z @ coef, R)


def apply_gram_inverse(sol, v):
    """Return (Z'Z)^{-1} v using two triangular solves with the stored R."""
    v = as_vector(v, "v")
    R = sol.r_factor
    if v.shape[0] != R.shape[0]:
        raise InvalidInputError(f"v has length {v.shape[0]}, expected {R.shape[0]}")
    _check_r_factor(R)
    w = solve_triangular(R, v, trans="T")
    return solve_triangular(R, w)


def thin_svd(A):
    """Thin SVD of a tall (or square) matrix via one-sided Jacobi rotations.

    Orthogonalizes the columns of A by plane rotations until every
    off-diagonal Gram entry |a_i . a_j| falls below
    ``JACOBI_OFF_TOL * ||A||_F^2``, then reads off singular values as
    column norms.

    Parameters
    ----------
    A : ndarray, shape (m, n) with m >= n

    Returns
    -------
    (U, singular_values, V)
        U is m x n with orthonormal columns, singular_values is length n
        sorted descending, V is n x n orthogonal, and
        A = U @ diag(singular_values) @ V.T.

    Raises
    ------
    NoConvergenceError
        If more than ``JACOBI_MAX_SWEEPS`` sweeps are needed.
    """
    A = as_matrix(A, "A")
    m, n = A.shape
    if m < n:
        raise InvalidInputError(f"thin_svd expects m >= n, got {m} x {n}; transpose first")
    G = A.copy()
    V = np.eye(n)
    fro2 = float(np.sum(G * G))
    if fro2 == 0.0:
        return np.zeros((m, n)), np.zeros(n), V
    off_tol = JACOBI_OFF_TOL * fro2
    for _ in range(JACOBI_MAX_SWEEPS):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                gi = G[:, i]
                gj = G[:, j]
                c_off = float(gi @ gj)
                if abs(c_off) <= off_tol:
                    continue
                rotated = True
                a = float(gi @ gi)
                b = float(gj @ gj)
                # Jacobi rotation zeroing the (i, j) Gram entry; equal column
                # norms (zeta = 0) take the 45-degree branch
                zeta = (b - a) / (2.0 * c_off)
                sign = 1.0 if zeta >= 0 else -1.0
                t = sign / (abs(zeta) + np.hypot(1.0, zeta))
                cs = 1.0 / np.hypot(1.0, t)
                sn = cs * t
                gi_new = cs * gi - sn * gj
                G[:, j] = sn * gi + cs * gj
                G[:, i] = gi_new
                vi = V[:, i].copy()
                V[:, i] = cs * vi - sn * V[:, j]
                V[:, j] = sn * vi + cs * V[:, j]
        if not rotated:
            break
    else:
        raise NoConvergenceError(
            f"one-sided Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )
    sigma = np.sqrt(np.einsum("ij,ij->j", G, G))
    order = np.argsort(sigma)[::-1]
    sigma = sigma[order]
    G = G[:, order]
    V = V[:, order]
    U = np.zeros_like(G)
    nonzero = sigma > 0
    U[:, nonzero] = G[:, nonzero] / sigma[nonzero]
    return U, sigma, V
