"""Nearest-neighbour estimates of the conditional noise variance.

The squared OLS residuals of a node are averaged over a sliding window in
the order given by the heteroskedasticity driver (the sampling index, or the
values of a declared parent). Reciprocals of the smoothed variances are the
weights for feasible WLS.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .errors import ConfigError, EmptyInput, MissingDriver
from .regression import ols_fit

NONE = "none"
SAMPLING_INDEX = "sampling_index"
PARENT = "parent"

REL_VARIANCE_FLOOR = 1e-12
ABS_VARIANCE_FLOOR = 1e-300


@dataclass(frozen=True)
class HeteroSpec:
    """Expert-knowledge declaration for one variable.

    ``kind`` is one of ``"none"``, ``"sampling_index"`` or ``"parent"``;
    ``driver`` names the parent variable when ``kind == "parent"``.
    """

    kind: str = NONE
    driver: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (NONE, SAMPLING_INDEX, PARENT):
            raise ConfigError(f"unknown heteroskedasticity kind {self.kind!r}")
        if self.kind == PARENT and not self.driver:
            raise ConfigError("parent-driven heteroskedasticity needs a driver name")
        if self.kind != PARENT and self.driver is not None:
            raise ConfigError(f"kind {self.kind!r} does not take a driver")

    @classmethod
    def sampling_index(cls) -> "HeteroSpec":
        return cls(SAMPLING_INDEX)

    @classmethod
    def parent(cls, name: str) -> "HeteroSpec":
        return cls(PARENT, name)

    @property
    def declared(self) -> bool:
        return self.kind != NONE

    def to_json(self) -> str:
        if self.kind == PARENT:
            return f"parent:{self.driver}"
        return self.kind

    @classmethod
    def from_json(cls, value) -> "HeteroSpec":
        """Parse ``None``, ``"none"``, ``"sampling_index"``, ``"parent:NAME"``
        or ``{"parent": "NAME"}``."""
        if value is None or value is False:
            return cls()
        if isinstance(value, dict):
            if set(value) != {PARENT} or not isinstance(value[PARENT], str):
                raise ConfigError(f"cannot parse heteroskedasticity declaration {value!r}")
            return cls.parent(value[PARENT])
        if isinstance(value, str):
            if value in (NONE, SAMPLING_INDEX):
                return cls(value)
            if value.startswith(PARENT + ":") and len(value) > len(PARENT) + 1:
                return cls.parent(value[len(PARENT) + 1:])
        raise ConfigError(f"cannot parse heteroskedasticity declaration {value!r}")


ExpertKnowledge = Mapping[str, HeteroSpec]


def smooth_squared_residuals(r, lam: int) -> np.ndarray:
    """Windowed mean of ``r**2`` over ``[i - lam//2, i + lam//2]``.

    The window is truncated at the boundaries and the mean is taken over the
    terms actually present. Results are floored to stay strictly positive.
    """
    r = np.asarray(r, dtype=float)
    n = r.size
    if n == 0:
        raise EmptyInput("cannot smooth an empty residual vector")
    lam = int(lam)
    if not 1 <= lam <= n:
        raise ConfigError(f"window length must lie in [1, {n}], got {lam}")
    half = lam // 2
    kernel = np.ones(2 * half + 1)
    sums = np.convolve(r * r, kernel, mode="same")
    idx = np.arange(n)
    counts = np.minimum(idx + half, n - 1) - np.maximum(idx - half, 0) + 1
    var = sums / counts
    floor = max(REL_VARIANCE_FLOOR * float(var.max()), ABS_VARIANCE_FLOOR)
    return np.maximum(var, floor)


def estimate_variance(node, Z, spec: HeteroSpec, driver_values=None, lam: int = 10) -> np.ndarray:
    """Estimated conditional noise variance of ``node`` given regressors ``Z``."""
    node = np.asarray(node, dtype=float)
    resid = ols_fit(Z, node).residuals
    if spec.kind == SAMPLING_INDEX:
        return smooth_squared_residuals(resid, lam)
    if spec.kind == PARENT:
        if driver_values is None:
            raise MissingDriver(f"driver values for {spec.driver!r} were not supplied")
        driver_values = np.asarray(driver_values, dtype=float)
        if driver_values.shape != resid.shape:
            raise MissingDriver(
                f"driver has {driver_values.size} samples, node has {resid.size}"
            )
        order = np.argsort(driver_values, kind="stable")
        var = np.empty_like(resid)
        var[order] = smooth_squared_residuals(resid[order], lam)
        return var
    raise ConfigError("weights requested for a variable without declared heteroskedasticity")


def estimate_weights(node, Z, spec: HeteroSpec, driver_values=None, lam: int = 10) -> np.ndarray:
    """Feasible-WLS weights: reciprocal of :func:`estimate_variance`."""
    return 1.0 / estimate_variance(node, Z, spec, driver_values, lam)
