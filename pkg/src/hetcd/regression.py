"""Ordinary and weighted least-squares fits used to residualize variables.

Both solvers go through a QR factorization of the (optionally sqrt-weight
scaled) design, so the normal equations are never formed explicitly.
Columns are used as given; no intercept is added.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionError, NonPositiveWeight, SingularDesign

RCOND_MIN = 1e-12


@dataclass(frozen=True)
class FitResult:
    """Coefficients and *unweighted* residuals ``y - X @ beta``."""

    beta: np.ndarray
    residuals: np.ndarray
    weighted: bool = False


def _as_design(X, n: int) -> np.ndarray:
    if X is None:
        return np.empty((n, 0))
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionError(f"design matrix must be 2-d, got shape {X.shape}")
    if X.shape[0] != n:
        raise DimensionError(f"design has {X.shape[0]} rows but y has {n} entries")
    return X


def _as_vector(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise DimensionError(f"expected a 1-d sample vector, got shape {y.shape}")
    if y.size == 0:
        raise DimensionError("sample vector is empty")
    return y


def check_weights(w, n: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise DimensionError(f"weights have shape {w.shape}, expected ({n},)")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise NonPositiveWeight("all weights must be finite and strictly positive")
    return w


def _lstsq_qr(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(A, mode="reduced")
    sv = np.linalg.svd(r, compute_uv=False)
    if sv[0] == 0 or sv[-1] / sv[0] < RCOND_MIN:
        raise SingularDesign(
            "design matrix is numerically singular "
            f"(reciprocal condition number {sv[-1] / sv[0] if sv[0] else 0.0:.3g})"
        )
    return solve_triangular(r, q.T @ b, lower=False)


def ols_fit(X, y) -> FitResult:
    """Least-squares fit of ``y`` on the columns of ``X``.

    With zero regressors the residuals are ``y`` itself.
    """
    y = _as_vector(y)
    X = _as_design(X, y.size)
    if X.shape[1] == 0:
        return FitResult(np.empty(0), y.copy(), weighted=False)
    beta = _lstsq_qr(X, y)
    return FitResult(beta, y - X @ beta, weighted=False)


def wls_fit(X, y, w) -> FitResult:
    """Weighted least squares minimizing ``(y - Xb)^T diag(w) (y - Xb)``.

    Solved as OLS on the rows scaled by ``sqrt(w)``. The returned residuals
    are on the original (unweighted) scale.
    """
    y = _as_vector(y)
    X = _as_design(X, y.size)
    w = check_weights(w, y.size)
    if X.shape[1] == 0:
        return FitResult(np.empty(0), y.copy(), weighted=True)
    sw = np.sqrt(w)
    beta = _lstsq_qr(X * sw[:, None], y * sw)
    return FitResult(beta, y - X @ beta, weighted=True)


def standardized_residuals(fit: FitResult, w) -> np.ndarray:
    """Return ``sqrt(w) * residuals``, which is homoskedastic when ``w = 1/sigma^2``."""
    w = check_weights(w, fit.residuals.size)
    return np.sqrt(w) * fit.residuals
