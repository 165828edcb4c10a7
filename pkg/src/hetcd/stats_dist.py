"""Student-t distribution, Gaussian sampling and p-value summary statistics."""
from __future__ import annotations

import math

import numpy as np

from .errors import EmptyInput, InvalidDof, InvalidQuantile

_CF_MAXITER = 20000
_CF_EPS = 1e-16
_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _stirling_tail(z: float) -> float:
    zi2 = 1.0 / (z * z)
    return (1.0 / 12.0 - zi2 * (1.0 / 360.0 - zi2 / 1260.0)) / z


def _log_gamma_ratio(a: float, b: float) -> float:
    """``lgamma(a + b) - lgamma(a)`` without cancellation when ``a`` is large."""
    if a < 100.0:
        return math.lgamma(a + b) - math.lgamma(a)
    return (
        (a - 0.5) * math.log1p(b / a) + b * math.log(a + b) - b
        + _stirling_tail(a + b) - _stirling_tail(a)
    )


def betainc_reg(a: float, b: float, x: float, xc: float | None = None) -> float:
    """Regularized incomplete beta ``I_x(a, b)``.

    ``xc`` may carry an accurately computed ``1 - x``.
    """
    if xc is None:
        xc = 1.0 - x
    if x <= 0.0:
        return 0.0
    if xc <= 0.0:
        return 1.0
    log_front = (
        _log_gamma_ratio(max(a, b), min(a, b)) - math.lgamma(min(a, b))
        + a * math.log(x) + b * math.log(xc)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, xc) / b


def _check_dof(dof) -> float:
    if not (dof >= 1) or not math.isfinite(dof):
        raise InvalidDof(f"degrees of freedom must be >= 1, got {dof}")
    return float(dof)


def _upper_tail(t: float, dof: float) -> float:
    """P(T > t) for t >= 0."""
    t2 = t * t
    return 0.5 * betainc_reg(0.5 * dof, 0.5, dof / (dof + t2), t2 / (dof + t2))


def student_t_cdf(x: float, dof) -> float:
    """CDF of Student's t distribution with ``dof`` degrees of freedom."""
    dof = _check_dof(dof)
    x = float(x)
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    if x == 0.0:
        return 0.5
    tail = _upper_tail(abs(x), dof)
    return tail if x < 0 else 1.0 - tail


def student_t_sf(x: float, dof) -> float:
    """Survival function ``1 - cdf``, accurate in the upper tail."""
    return student_t_cdf(-float(x), dof)


def student_t_pdf(x: float, dof) -> float:
    dof = _check_dof(dof)
    log_norm = math.lgamma(0.5 * (dof + 1)) - math.lgamma(0.5 * dof) - 0.5 * math.log(dof * math.pi)
    return math.exp(log_norm - 0.5 * (dof + 1) * math.log1p(x * x / dof))


def _solve_upper_tail(target: float, dof: float) -> float:
    # find t >= 0 with P(T > t) == target, 0 < target < 0.5
    lo, hi = 0.0, 1.0
    while _upper_tail(hi, dof) > target:
        lo, hi = hi, 2.0 * hi
    t = 0.5 * (lo + hi)
    for _ in range(500):
        f = _upper_tail(t, dof) - target
        if f > 0:
            lo = t
        else:
            hi = t
        pdf = student_t_pdf(t, dof)
        step = f / pdf if pdf > 0 else math.inf
        new = t + step
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        if abs(new - t) <= 1e-15 * max(1.0, abs(t)) or hi - lo <= 1e-15 * max(1.0, hi):
            return new
        t = new
    return t


def student_t_quantile(q: float, dof) -> float:
    """Inverse of :func:`student_t_cdf` in ``q``."""
    dof = _check_dof(dof)
    q = float(q)
    if not 0.0 < q < 1.0:
        raise InvalidQuantile(f"quantile level must lie in (0, 1), got {q}")
    if q == 0.5:
        return 0.0
    if q > 0.5:
        return _solve_upper_tail(1.0 - q, dof)
    return -_solve_upper_tail(q, dof)


def two_sided_p_value(stat: float, dof) -> float:
    if math.isinf(stat):
        return 0.0
    return min(1.0, 2.0 * student_t_sf(abs(stat), dof))


def _check_pvalues(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0:
        raise EmptyInput("p-value sample is empty")
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("p-values must lie in [0, 1]")
    return p


def ks_uniform(p) -> float:
    """Kolmogorov-Smirnov distance between the ECDF of ``p`` and U(0, 1)."""
    p = np.sort(_check_pvalues(p))
    m = p.size
    i = np.arange(1, m + 1)
    d_plus = np.max(i / m - p)
    d_minus = np.max(p - (i - 1) / m)
    return float(max(d_plus, d_minus))


def aupc(p) -> float:
    """Area under the empirical power curve ``alpha -> mean(p <= alpha)``."""
    return float(1.0 - np.mean(_check_pvalues(p)))


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator for ``seed`` and a replication key path; streams for distinct
    keys are statistically independent."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(keys)))


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit integer seed derived from ``seed`` and ``keys``."""
    state = np.random.SeedSequence(seed, spawn_key=tuple(keys)).generate_state(1, np.uint64)[0]
    return int(state >> np.uint64(1))


def sample_standard_normal(rng: np.random.Generator, count: int) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be >= 1")
    return rng.standard_normal(count)
