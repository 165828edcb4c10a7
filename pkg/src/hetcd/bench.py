"""Monte-Carlo benchmarks for the CI tests and for PC-stable.

Every replication draws from its own generator, seeded from
``(cell_seed, rep)`` where ``cell_seed`` is derived from the master seed and
the strength index. Results are reduced in replication order, so the output
does not depend on the number of worker processes.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .citest import ESTIMATED, GROUND_TRUTH, OLS, WLS, CITestSpec, run_ci_test
from .errors import ConfigError
from .graph import cpdag_of
from .metrics import adjacency_scores, edgemark_scores
from .pc import PcConfig, pc_stable
from .scm_sim import LINEAR, PERIODIC, random_scm, scaling_for, simulate, simulate_bivariate
from .stats_dist import aupc, derive_seed, ks_uniform, make_rng
from .variance_weights import HeteroSpec

EXPERIMENTS = ("citest-bench", "pc-bench", "simulate", "ci-single")
VARIANTS = ("ols", "wls-estimated", "wls-groundtruth")
PLACEMENTS = ("x-only", "both", "random-graph")
CSV_COLUMNS = ("experiment", "variant", "strength", "metric", "value", "stderr",
               "n", "reps", "seed", "cell_seed", "config_hash")
PC_METRICS = ("tpr", "fpr", "precision", "edgemark_precision", "edgemark_recall")
BOOTSTRAP_KEY = 2**32 - 1


@dataclass
class ExperimentConfig:
    experiment: str = "citest-bench"
    strengths: list = field(default_factory=lambda: [0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    reps: int = 100
    n: int = 500
    alpha: float = 0.05
    lam: Optional[int] = None  # default 10 for citest-bench, 5 for pc-bench
    weight_mode: str = ESTIMATED
    variants: list = field(default_factory=lambda: list(VARIANTS))
    placement: str = "x-only"
    shape: str = LINEAR  # "linear", "periodic" or "mixed"
    driver: str = "z"  # "z", "index" or "mixed"
    d: int = 10
    m: int = 10
    coeff: float = 0.5
    hetero_fraction: float = 0.3
    bootstrap: int = 1000
    seed: int = 0
    output: Optional[str] = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if int(self.reps) < 1:
            raise ConfigError("reps must be >= 1")
        if not self.strengths or any(float(s) < 0 for s in self.strengths):
            raise ConfigError("strengths must be a non-empty list of values >= 0")
        if int(self.n) < 4:
            raise ConfigError("n must be >= 4")
        if not 0 < float(self.alpha) < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.lam is not None and not 1 <= int(self.lam) <= int(self.n):
            raise ConfigError("lam must lie in [1, n]")
        if self.weight_mode not in (ESTIMATED, GROUND_TRUTH):
            raise ConfigError(f"weight_mode must be {ESTIMATED!r} or {GROUND_TRUTH!r}")
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad or not self.variants:
            raise ConfigError(f"unknown variants {bad}; choose from {VARIANTS}")
        if self.placement not in PLACEMENTS:
            raise ConfigError(f"placement must be one of {PLACEMENTS}")
        if self.shape not in (LINEAR, PERIODIC, "mixed"):
            raise ConfigError("shape must be 'linear', 'periodic' or 'mixed'")
        if self.driver not in ("z", "index", "mixed"):
            raise ConfigError("driver must be 'z', 'index' or 'mixed'")
        if int(self.d) < 2 or not 0 <= int(self.m) <= int(self.d) * (int(self.d) - 1) // 2:
            raise ConfigError("need d >= 2 and 0 <= m <= d(d-1)/2")
        if not 0 <= float(self.hetero_fraction) <= 1:
            raise ConfigError("hetero_fraction must lie in [0, 1]")
        if int(self.bootstrap) < 1:
            raise ConfigError("bootstrap must be >= 1")

    @property
    def window(self) -> int:
        if self.lam is not None:
            return int(self.lam)
        return 5 if self.experiment == "pc-bench" else 10

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    def config_hash(self) -> str:
        payload = {k: v for k, v in self.to_dict().items() if k != "output"}
        blob = json.dumps(payload, sort_keys=True, default=float).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def worker_count() -> int:
    raw = os.environ.get("HETCD_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"HETCD_THREADS must be an integer, got {raw!r}") from None
    return max(1, value)


def _pool_map(func, items, workers: Optional[int] = None) -> list:
    items = list(items)
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(items) < 2:
        return [func(it) for it in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunk))


def _variant_spec(variant: str, knowledge: dict, lam: int, alpha: float) -> CITestSpec:
    if variant == "ols":
        return CITestSpec(OLS, {}, lam, ESTIMATED, alpha)
    mode = ESTIMATED if variant == "wls-estimated" else GROUND_TRUTH
    return CITestSpec(WLS, knowledge, lam, mode, alpha)


# ---------------------------------------------------------------- CI bench

def _bivariate_setup(cfg: ExperimentConfig, strength: float):
    driver = "Z" if cfg.driver == "z" else None
    shape = cfg.shape if cfg.shape != "mixed" else LINEAR
    h = scaling_for(shape, strength, driver)
    hy = h if cfg.placement == "both" else None
    decl = h.knowledge()
    knowledge = {"X": decl, "Y": decl if hy is not None else HeteroSpec(), "Z": HeteroSpec()}
    return h, hy, knowledge


def _citest_rep(job) -> dict:
    cfg, strength, cell_seed, rep = job
    hx, hy, knowledge = _bivariate_setup(cfg, strength)
    out = {}
    for stream, c in ((0, 0.0), (1, cfg.coeff)):
        sim = simulate_bivariate(cfg.coeff, cfg.coeff, c, hx, hy, cfg.n,
                                 make_rng(cell_seed, rep, stream))
        for v in cfg.variants:
            spec = _variant_spec(v, knowledge, cfg.window, cfg.alpha)
            res = run_ci_test(sim.data, "X", "Y", ["Z"], spec, sim.true_sigma)
            out[(v, stream)] = res.p_value
    return out


def _bootstrap_se(values: np.ndarray, stat, rng: np.random.Generator, resamples: int) -> float:
    m = values.size
    draws = np.empty(resamples)
    for b in range(resamples):
        draws[b] = stat(values[rng.integers(0, m, m)])
    draws = draws[np.isfinite(draws)]
    return float(np.std(draws, ddof=1)) if draws.size > 1 else float("nan")


def run_citest_bench(cfg: ExperimentConfig, workers: Optional[int] = None) -> list[dict]:
    """KS (independent case, c = 0) and AUPC (dependent case) per strength and variant."""
    if cfg.placement == "random-graph":
        raise ConfigError("citest-bench supports placement 'x-only' or 'both'")
    if cfg.driver == "mixed":
        raise ConfigError("citest-bench needs driver 'z' or 'index'")
    chash = cfg.config_hash()
    jobs = []
    cells = []
    for si, s in enumerate(cfg.strengths):
        cell_seed = derive_seed(cfg.seed, si)
        cells.append(cell_seed)
        jobs.extend((cfg, float(s), cell_seed, r) for r in range(cfg.reps))
    results = _pool_map(_citest_rep, jobs, workers)
    rows = []
    for si, s in enumerate(cfg.strengths):
        reps = results[si * cfg.reps:(si + 1) * cfg.reps]
        for vi, v in enumerate(cfg.variants):
            for mi, (metric, stream, fn) in enumerate((("ks", 0, ks_uniform), ("aupc", 1, aupc))):
                p = np.array([r[(v, stream)] for r in reps])
                boot = make_rng(cells[si], BOOTSTRAP_KEY, vi, mi)
                rows.append(_row(cfg, v, s, metric, fn(p), _bootstrap_se(p, fn, boot, cfg.bootstrap),
                                 cells[si], chash))
    return rows


# ---------------------------------------------------------------- PC bench

def _pc_scm(cfg: ExperimentConfig, strength: float, rng):
    shapes = (LINEAR, PERIODIC) if cfg.shape == "mixed" else (cfg.shape,)
    drivers = {"mixed": ("parent", "sampling_index"), "z": ("parent",),
               "index": ("sampling_index",)}[cfg.driver]
    return random_scm(cfg.d, cfg.m, strength, rng, cfg.coeff, cfg.hetero_fraction, shapes, drivers)


def _pc_rep(job) -> dict:
    cfg, strength, cell_seed, rep = job
    rng = make_rng(cell_seed, rep)
    spec = _pc_scm(cfg, strength, rng)
    sim = simulate(spec, cfg.n, rng)
    truth = cpdag_of(spec.graph)
    knowledge = spec.knowledge()
    out = {}
    for v in cfg.variants:
        pcfg = PcConfig(cfg.alpha, _variant_spec(v, knowledge, cfg.window, cfg.alpha))
        t0 = time.perf_counter()
        est = pc_stable(sim.data, pcfg, sim.true_sigma).cpdag
        elapsed = time.perf_counter() - t0
        adj = adjacency_scores(est, truth)
        em = edgemark_scores(est, truth)
        out[v] = {"tpr": adj.tpr, "fpr": adj.fpr, "precision": adj.precision,
                  "edgemark_precision": em.precision, "edgemark_recall": em.recall,
                  "runtime": elapsed}
    return out


def _nanmean(x: np.ndarray) -> float:
    x = x[np.isfinite(x)]
    return float(x.mean()) if x.size else float("nan")


def run_pc_bench(cfg: ExperimentConfig, workers: Optional[int] = None,
                 timings: Optional[dict] = None) -> list[dict]:
    """Adjacency and edgemark scores of PC-stable per strength and variant.

    If ``timings`` is given it is filled with ``(strength, variant) -> list of
    PC runtimes in seconds``; timings never enter the returned rows.
    """
    chash = cfg.config_hash()
    jobs = []
    cells = []
    for si, s in enumerate(cfg.strengths):
        cell_seed = derive_seed(cfg.seed, si)
        cells.append(cell_seed)
        jobs.extend((cfg, float(s), cell_seed, r) for r in range(cfg.reps))
    results = _pool_map(_pc_rep, jobs, workers)
    rows = []
    for si, s in enumerate(cfg.strengths):
        reps = results[si * cfg.reps:(si + 1) * cfg.reps]
        for vi, v in enumerate(cfg.variants):
            if timings is not None:
                timings[(float(s), v)] = [r[v]["runtime"] for r in reps]
            for mi, metric in enumerate(PC_METRICS):
                vals = np.array([np.nan if r[v][metric] is None else r[v][metric] for r in reps])
                boot = make_rng(cells[si], BOOTSTRAP_KEY, vi, mi)
                rows.append(_row(cfg, v, s, metric, _nanmean(vals),
                                 _bootstrap_se(vals, _nanmean, boot, cfg.bootstrap),
                                 cells[si], chash))
    return rows


# ---------------------------------------------------------------- output

def _row(cfg, variant, strength, metric, value, stderr, cell_seed, chash) -> dict:
    return {"experiment": cfg.experiment, "variant": variant, "strength": float(strength),
            "metric": metric, "value": float(value), "stderr": float(stderr),
            "n": int(cfg.n), "reps": int(cfg.reps), "seed": int(cfg.seed),
            "cell_seed": int(cell_seed), "config_hash": chash}


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in CSV_COLUMNS])
    return buf.getvalue()


def lookup(rows: list[dict], variant: str, strength: float, metric: str) -> float:
    for r in rows:
        if r["variant"] == variant and r["strength"] == float(strength) and r["metric"] == metric:
            return r["value"]
    raise KeyError((variant, strength, metric))
