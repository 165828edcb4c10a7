"""Partial-correlation CI testing under heteroskedastic noise, with PC-stable."""

from .citest import CITestResult, CITestSpec, partial_corr, run_ci_test, studentize
from .data import Dataset
from .graph import Cpdag, Dag, cpdag_of, d_separated, random_dag
from .metrics import adjacency_scores, edgemark_scores
from .pc import PcConfig, PcResult, oracle_ci, pc_from_test, pc_stable
from .regression import FitResult, ols_fit, standardized_residuals, wls_fit
from .scm_sim import NoiseScaling, ScmSpec, scaling_value, simulate, simulate_bivariate
from .stats_dist import aupc, ks_uniform, student_t_cdf, student_t_quantile
from .variance_weights import HeteroSpec, estimate_weights, smooth_squared_residuals

__version__ = "0.1.0"
