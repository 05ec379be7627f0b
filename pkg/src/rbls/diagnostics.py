"""Regression diagnostics: residuals, leverage, influence, and their
sketched approximations.

Exact leverage is the hat-matrix diagonal l_i = z_i (Z'Z)^{-1} z_i',
computed through triangular solves with the stored QR factor.  Influence is
the leave-one-out change in fit d_i = e_i^2 l_i / (1 - l_i)^2, equal to
(b - b_{-i})' Z'Z (b - b_{-i}).  The randomized approximation replaces the
orthogonal basis with Z R^{-1} Pi2 where R^{-1} comes from the SVD of a
row-sketched copy of Z and Pi2 is a narrow sign projection.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DegenerateRangeError,
    InvalidInputError,
    LeverageOneError,
    SketchRankDeficientError,
)
from .linalg import as_matrix, as_vector, solve_ls
from .seeding import ROLE_PROJECTION, ROLE_SKETCH, spawn_rng, spawn_seed
from .srht import build_sketch, apply_sketch

# l_i -> 1 makes the influence denominator explode; clamp and count.
LEVERAGE_CLAMP = 1.0 - 1e-6
LOO_LEVERAGE_LIMIT = 1.0 - 1e-10

DEFAULT_HISTOGRAM_BINS = 50


@dataclass(frozen=True)
class DiagnosticsReport:
    """Per-row residuals, leverages, influences, and provenance.

    mode is "exact" or "approximate"; leverage_clamp_count is the number of
    rows whose leverage was clamped to [0, 1 - 1e-6] before the influence
    formula was applied.
    """

    residuals: np.ndarray
    leverages: np.ndarray
    influences: np.ndarray
    mode: str
    leverage_clamp_count: int


def exact_leverage(Z, sol):
    """Hat-matrix diagonal for the design Z, given its QR solution.

    Solves R' W = Z' once and reads l_i as squared column norms of W,
    O(n p^2) total.  For a full-rank design 0 <= l_i <= 1 and sum(l) = p.
    """
    Z = as_matrix(Z, "Z")
    W = solve_triangular(sol.r_factor, Z.T, trans="T")
    return np.einsum("ij,ij->j", W, W)


def influence(e, l):
    """Cook-style influence d_i = e_i^2 l_i / (1 - l_i)^2, elementwise.

    Leverages are clamped into [0, 1 - 1e-6] first so exact-interpolation
    rows yield a large but finite score.  Returns (influences, clamp_count).
    """
    e = as_vector(e, "e")
    l = as_vector(l, "l")
    if e.shape != l.shape:
        raise InvalidInputError("residual and leverage vectors differ in length")
    clamped = np.clip(l, 0.0, LEVERAGE_CLAMP)
    n_clamped = int(np.count_nonzero(clamped != l))
    d = e**2 * clamped / (1.0 - clamped) ** 2
    return d, n_clamped


def approx_influence(e_approx, l_approx):
    """Influence from sketched residuals and leverages.

    Same formula and clamp as :func:`influence`; approximate leverages may
    exceed 1, which the clamp absorbs (and counts).
    """
    return influence(e_approx, l_approx)


def compute_diagnostics(Z, y):
    """Full exact diagnostics for (Z, y): one OLS solve plus leverages."""
    sol = solve_ls(Z, y)
    lev = exact_leverage(Z, sol)
    d, n_clamped = influence(sol.residuals, lev)
    return DiagnosticsReport(sol.residuals, lev, d, "exact", n_clamped)


def loo_coefficients(Z, y, sol, i):
    """Coefficients after deleting row i, without refitting.

    Rank-one downdate of the normal equations:
    b_{-i} = b - (Z'Z)^{-1} z_i e_i / (1 - l_i).
    """
    Z = as_matrix(Z, "Z")
    y = as_vector(y, "y")
    i = int(i)
    if not 0 <= i < Z.shape[0]:
        raise InvalidInputError(f"row index {i} out of range for n={Z.shape[0]}")
    R = sol.r_factor
    w = solve_triangular(R, Z[i], trans="T")
    l_i = float(w @ w)
    if l_i >= LOO_LEVERAGE_LIMIT:
        raise LeverageOneError(
            f"row {i} has leverage {l_i:.12f}; it fully determines its own fit"
        )
    gram_inv_zi = solve_triangular(R, w)
    e_i = float(sol.residuals[i])
    return sol.coefficients - gram_inv_zi * e_i / (1.0 - l_i)


def approx_leverage(
    Z,
    sketch_rows,
    projection_cols,
    seed,
    *,
    sketched=None,
    right_projection=None,
):
    """Randomized leverage scores via two projections.

    A row sketch of Z (``sketch_rows`` rows, >= p) is factored with the thin
    SVD to get R^{-1} = V Sigma^{-1}; leverage is then read off as squared
    row norms of Z @ R^{-1} @ Pi2 where Pi2 is a p x ``projection_cols``
    matrix of i.i.d. +-1/sqrt(projection_cols) signs.  Cost after the sketch
    is O(n p projection_cols).

    Parameters
    ----------
    sketched : ndarray, optional
        Precomputed row sketch of Z.  Passing Z itself makes the basis step
        exact; callers that already hold a sketch reuse it here.
    right_projection : ndarray, optional
        Explicit Pi2, overriding the sign draw (identity recovers plain
        squared row norms of Z R^{-1}).

    Raises
    ------
    SketchRankDeficientError
        If the sketched matrix has a singular value below 1e-12 of the
        largest; increase sketch_rows.
    """
    from .linalg import thin_svd  # local import keeps module load cheap

    Z = as_matrix(Z, "Z")
    n, p = Z.shape
    sketch_rows = int(sketch_rows)
    projection_cols = int(projection_cols)
    if sketch_rows < p:
        raise InvalidInputError(f"need sketch_rows >= p, got {sketch_rows} < {p}")
    if right_projection is None and not 1 <= projection_cols <= p:
        raise InvalidInputError(f"need 1 <= projection_cols <= {p}, got {projection_cols}")
    if sketched is None:
        op = build_sketch(n, sketch_rows, spawn_seed(seed, ROLE_SKETCH))
        sketched = apply_sketch(op, Z)
    _, sigma, V = thin_svd(np.asarray(sketched, dtype=np.float64))
    if sigma[0] == 0.0 or sigma[-1] < 1e-12 * sigma[0]:
        raise SketchRankDeficientError(
            "row sketch of Z is rank deficient; increase sketch_rows"
        )
    r_inv = V / sigma
    if right_projection is None:
        rng = spawn_rng(seed, ROLE_PROJECTION)
        pi2 = (rng.integers(0, 2, (p, projection_cols)) * 2 - 1) / np.sqrt(projection_cols)
    else:
        pi2 = np.asarray(right_projection, dtype=np.float64)
    basis = Z @ (r_inv @ pi2)
    return np.einsum("ij,ij->i", basis, basis)


def histogram_l1_distance(a, b, bins=DEFAULT_HISTOGRAM_BINS):
    """L1 distance between the normalized histograms of two samples.

    Both samples are binned with ``bins`` equal-width bins spanning their
    pooled min/max; each histogram is normalized to total mass 1, so the
    distance lies in [0, 2] (2 = disjoint supports).
    """
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.size == 0 or b.size == 0:
        raise InvalidInputError("histogram inputs must be non-empty")
    if bins < 2:
        raise InvalidInputError(f"need bins >= 2, got {bins}")
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if lo == hi:
        raise DegenerateRangeError("pooled sample range is a single point")
    ha, _ = np.histogram(a, bins=bins, range=(lo, hi))
    hb, _ = np.histogram(b, bins=bins, range=(lo, hi))
    # rounding in the normalized sums can spill a few ulp past the bound
    return float(min(2.0, np.abs(ha / ha.sum() - hb / hb.sum()).sum()))
