"""Fast numerical self-checks behind ``hetcd selftest``."""
from __future__ import annotations

import itertools

import numpy as np
from scipy import integrate

from .graph import cpdag_of, random_dag
from .pc import oracle_ci, pc_from_test
from .regression import ols_fit, wls_fit
from .stats_dist import make_rng, student_t_cdf, student_t_pdf, student_t_quantile


def _wls_oracle() -> bool:
    rng = make_rng(1)
    for _ in range(50):
        X = rng.standard_normal((40, 3))
        y = rng.standard_normal(40)
        w = rng.uniform(0.1, 5.0, 40)
        sw = np.sqrt(w)
        ref = ols_fit(X * sw[:, None], y * sw).beta
        if np.max(np.abs(wls_fit(X, y, w).beta - ref)) > 1e-10:
            return False
    return True


def _t_distribution() -> bool:
    for dof, x in itertools.product((1, 5, 30), (-4.0, -0.5, 1.476, 6.0)):
        area, _ = integrate.quad(student_t_pdf, -np.inf, x, args=(dof,), epsabs=1e-13, epsrel=1e-13)
        if abs(area - student_t_cdf(x, dof)) > 1e-8:
            return False
        if abs(student_t_quantile(student_t_cdf(x, dof), dof) - x) > 1e-8:
            return False
    return True


def _pc_oracle() -> bool:
    rng = make_rng(2)
    for _ in range(10):
        g = random_dag(6, 7, rng)
        if pc_from_test(g.nodes, oracle_ci(g)).cpdag != cpdag_of(g):
            return False
    return True


CHECKS = (
    ("wls matches sqrt-weighted ols", _wls_oracle),
    ("student-t cdf/quantile vs quadrature", _t_distribution),
    ("pc-stable recovers cpdag with d-separation oracle", _pc_oracle),
)


def run_selftest(report=print) -> bool:
    ok = True
    for name, check in CHECKS:
        passed = bool(check())
        ok &= passed
        report(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
