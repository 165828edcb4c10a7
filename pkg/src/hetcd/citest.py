"""Partial-correlation conditional independence tests (OLS and WLS variants).

Each of the two tested variables is residualized on the conditioning set.
Variables with declared heteroskedasticity are refit by WLS, using either
window-estimated or ground-truth inverse variances, and their residuals are
standardized by ``sqrt(w)``. The Pearson correlation of the two residual
vectors is studentized and compared to ``t(n - 2 - k)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .data import Dataset
from .errors import ConfigError, InsufficientSamples, UnknownVariable, ZeroVariance
from .regression import ols_fit, standardized_residuals, wls_fit
from .stats_dist import two_sided_p_value
from .variance_weights import PARENT, HeteroSpec, estimate_weights

OLS = "ols"
WLS = "wls"
ESTIMATED = "estimated"
GROUND_TRUTH = "ground_truth"


@dataclass(frozen=True)
class CITestResult:
    rho_hat: float
    statistic: float
    dof: int
    p_value: float
    dependent: bool


@dataclass(frozen=True)
class CITestSpec:
    variant: str = OLS
    knowledge: Mapping[str, HeteroSpec] = field(default_factory=dict)
    lam: int = 10
    weight_mode: str = ESTIMATED
    alpha: float = 0.05

    def __post_init__(self):
        if self.variant not in (OLS, WLS):
            raise ConfigError(f"unknown CI test variant {self.variant!r}")
        if self.weight_mode not in (ESTIMATED, GROUND_TRUTH):
            raise ConfigError(f"unknown weight mode {self.weight_mode!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.lam) < 1:
            raise ConfigError("window length must be >= 1")


def partial_corr(rx, ry) -> float:
    """Pearson correlation of two residual vectors, clamped to [-1, 1]."""
    rx = np.asarray(rx, dtype=float)
    ry = np.asarray(ry, dtype=float)
    if rx.shape != ry.shape or rx.ndim != 1:
        raise ValueError("residual vectors must be 1-d and of equal length")
    if rx.size < 3:
        raise InsufficientSamples("partial correlation needs at least 3 samples")
    xc = rx - rx.mean()
    yc = ry - ry.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx <= 0.0 or syy <= 0.0:
        raise ZeroVariance("residual vector has zero variance")
    rho = float(xc @ yc) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, rho))


def studentize(rho_hat: float, n: int, k: int) -> tuple[float, int]:
    """Return ``(rho * sqrt(dof) / sqrt(1 - rho^2), dof)`` with ``dof = n - 2 - k``."""
    dof = n - 2 - k
    if dof < 1:
        raise InsufficientSamples(f"n - 2 - k = {dof} < 1 (n={n}, k={k})")
    if abs(rho_hat) > 1:
        raise ValueError("|rho_hat| must not exceed 1")
    denom = 1.0 - rho_hat * rho_hat
    if denom <= 0.0:
        return math.copysign(math.inf, rho_hat), dof
    return rho_hat * math.sqrt(dof) / math.sqrt(denom), dof


def residualize(data: Dataset, node: str, cond: Sequence[str], spec: CITestSpec,
                true_sigma: Optional[Mapping[str, np.ndarray]] = None) -> np.ndarray:
    """Residuals of ``node`` on ``cond`` as fed into the correlation step."""
    v = data.column(node)
    Z = data.columns(cond) if cond else None
    hs = spec.knowledge.get(node) if spec.variant == WLS else None
    if hs is None or not hs.declared:
        return ols_fit(Z, v).residuals
    if spec.weight_mode == GROUND_TRUTH:
        if true_sigma is None or node not in true_sigma:
            raise ConfigError(f"ground-truth weights requested but no true sigma for {node!r}")
        w = 1.0 / np.asarray(true_sigma[node], dtype=float) ** 2
    else:
        driver = data.column(hs.driver) if hs.kind == PARENT else None
        w = estimate_weights(v, Z, hs, driver, spec.lam)
    return standardized_residuals(wls_fit(Z, v, w), w)


def run_ci_test(data: Dataset, x: str, y: str, cond: Sequence[str] = (),
                spec: CITestSpec = CITestSpec(),
                true_sigma: Optional[Mapping[str, np.ndarray]] = None) -> CITestResult:
    """Test ``x _||_ y | cond`` on ``data``."""
    cond = list(cond)
    for name in [x, y, *cond]:
        if name not in data.names:
            raise UnknownVariable(f"unknown variable {name!r}")
    if x == y or x in cond or y in cond:
        raise ValueError("x and y must be distinct and not in the conditioning set")
    dof = data.n - 2 - len(cond)
    if dof < 1:
        raise InsufficientSamples(f"n - 2 - k = {dof} < 1")
    rx = residualize(data, x, cond, spec, true_sigma)
    ry = residualize(data, y, cond, spec, true_sigma)
    rho = partial_corr(rx, ry)
    stat, dof = studentize(rho, data.n, len(cond))
    p = two_sided_p_value(stat, dof)
    return CITestResult(rho, stat, dof, p, p < spec.alpha)
