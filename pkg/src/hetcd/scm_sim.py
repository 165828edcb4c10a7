"""Linear Gaussian SCMs with multiplicative (heteroskedastic) noise scaling.

Each node is ``X_i = sum_p coeff(p -> i) * X_p + h_i(driver) * N_i`` with
standard-normal ``N_i``. The driver is either one parent or the sampling
index, which is mapped onto ``[-3, 3]`` via ``u_t = 6 t / n - 3``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .data import Dataset
from .errors import ConfigError, InvalidSpec
from .graph import Dag, random_dag
from .stats_dist import make_rng
from .variance_weights import HeteroSpec

LINEAR = "linear"
PERIODIC = "periodic"
DEFAULT_COEFF = 0.5


@dataclass(frozen=True)
class NoiseScaling:
    """Noise-scaling function ``h``; ``driver=None`` means the sampling index."""

    shape: str = LINEAR
    strength: float = 0.0
    driver: Optional[str] = None

    def __post_init__(self):
        if self.shape not in (LINEAR, PERIODIC):
            raise InvalidSpec(f"unknown scaling shape {self.shape!r}")
        if not math.isfinite(self.strength) or self.strength < 0:
            raise InvalidSpec(f"strength must be finite and >= 0, got {self.strength}")

    def knowledge(self) -> HeteroSpec:
        """Expert-knowledge entry describing this scaling."""
        return HeteroSpec.sampling_index() if self.driver is None else HeteroSpec.parent(self.driver)

    def to_dict(self) -> dict:
        return {"shape": self.shape, "strength": self.strength,
                "driver": self.knowledge().to_json()}

    @classmethod
    def from_dict(cls, obj: dict) -> "NoiseScaling":
        spec = HeteroSpec.from_json(obj.get("driver", "sampling_index"))
        if not spec.declared:
            raise InvalidSpec("noise scaling needs a driver")
        return cls(obj.get("shape", LINEAR), float(obj.get("strength", 0.0)), spec.driver)


def scaling_value(ns: NoiseScaling, x):
    """Evaluate ``h`` at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    s = ns.strength
    if ns.shape == LINEAR:
        out = 1.0 + s * x * (x >= 0)
    else:
        out = 1.0 + s * np.sin(x) + s
    return float(out) if out.ndim == 0 else out


def sampling_index_driver(n: int) -> np.ndarray:
    t = np.arange(1, n + 1)
    return 6.0 * t / n - 3.0


@dataclass(frozen=True)
class ScmSpec:
    graph: Dag
    coefficients: Mapping[tuple, float] = field(default_factory=dict)
    hetero: Mapping[str, NoiseScaling] = field(default_factory=dict)

    def __post_init__(self):
        coeffs = dict(self.coefficients)
        if set(coeffs) != set(self.graph.edges):
            missing = set(self.graph.edges) - set(coeffs)
            extra = set(coeffs) - set(self.graph.edges)
            raise InvalidSpec(f"coefficient map mismatch: missing {sorted(missing)}, extra {sorted(extra)}")
        for node, ns in self.hetero.items():
            if node not in self.graph.index:
                raise InvalidSpec(f"heteroskedastic node {node!r} not in graph")
            if ns.driver is not None and ns.driver not in self.graph.parents(node):
                raise InvalidSpec(f"driver {ns.driver!r} of {node!r} is not a parent")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "hetero", dict(self.hetero))

    @classmethod
    def with_default_coefficients(cls, graph: Dag, hetero=None, coeff: float = DEFAULT_COEFF) -> "ScmSpec":
        return cls(graph, {e: coeff for e in graph.edges}, hetero or {})

    def knowledge(self) -> dict[str, HeteroSpec]:
        """Exact expert knowledge: the declared driver of every heteroskedastic node."""
        return {v: (self.hetero[v].knowledge() if v in self.hetero else HeteroSpec())
                for v in self.graph.nodes}

    def to_dict(self) -> dict:
        g = self.graph
        edges = sorted(self.coefficients, key=lambda e: (g.index[e[0]], g.index[e[1]]))
        return {
            "graph": g.to_dict(),
            "coefficients": [[a, b, self.coefficients[(a, b)]] for a, b in edges],
            "hetero": {v: self.hetero[v].to_dict() for v in g.nodes if v in self.hetero},
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ScmSpec":
        try:
            graph = Dag.from_dict(obj["graph"])
            raw = obj.get("coefficients")
            if raw is None:
                coeffs = {e: DEFAULT_COEFF for e in graph.edges}
            else:
                coeffs = {(a, b): float(c) for a, b, c in raw}
            hetero = {v: NoiseScaling.from_dict(h) for v, h in obj.get("hetero", {}).items()}
        except (KeyError, TypeError, ValueError, ConfigError) as exc:
            raise InvalidSpec(f"malformed SCM spec: {exc}") from None
        return cls(graph, coeffs, hetero)


@dataclass(frozen=True)
class SimOutput:
    data: Dataset
    true_sigma: dict  # node -> length-n vector of noise standard deviations


def simulate_from_noise(spec: ScmSpec, noise: np.ndarray) -> SimOutput:
    """Propagate a given ``(n, d)`` noise matrix (columns in node order) through ``spec``."""
    g = spec.graph
    n = noise.shape[0]
    if noise.shape != (n, len(g.nodes)):
        raise InvalidSpec(f"noise matrix has shape {noise.shape}")
    values = np.zeros_like(noise, dtype=float)
    sigma = {}
    index_driver = None
    for v in g.topological_order():
        i = g.index[v]
        mean = np.zeros(n)
        for p in g.parents(v):
            mean += spec.coefficients[(p, v)] * values[:, g.index[p]]
        ns = spec.hetero.get(v)
        if ns is None:
            h = np.ones(n)
        else:
            if ns.driver is None:
                if index_driver is None:
                    index_driver = sampling_index_driver(n)
                drv = index_driver
            else:
                drv = values[:, g.index[ns.driver]]
            h = scaling_value(ns, drv)
        sigma[v] = h
        values[:, i] = mean + h * noise[:, i]
    return SimOutput(Dataset(g.nodes, values), {v: sigma[v] for v in g.nodes})


def simulate(spec: ScmSpec, n: int, seed) -> SimOutput:
    """Draw ``n`` samples from ``spec``. ``seed`` may be an int or a Generator."""
    if n < 1:
        raise InvalidSpec("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(int(seed))
    noise = rng.standard_normal((n, len(spec.graph.nodes)))
    return simulate_from_noise(spec, noise)


def simulate_bivariate(a: float = 0.5, b: float = 0.5, c: float = 0.5,
                       hx: NoiseScaling | None = None, hy: NoiseScaling | None = None,
                       n: int = 500, seed=0) -> SimOutput:
    """Confounded three-variable model

        X = a Z + c E + h_X N_X,   Y = b Z + c E + h_Y N_Y,

    with latent ``E``. ``X`` and ``Y`` are independent given ``Z`` iff ``c == 0``.
    Scaling drivers must be ``"Z"`` or the sampling index. Columns: X, Y, Z.
    """
    for h in (hx, hy):
        if h is not None and h.driver not in (None, "Z"):
            raise InvalidSpec(f"bivariate scaling driver must be Z or the sampling index, got {h.driver!r}")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(int(seed))
    noise = rng.standard_normal((n, 4))
    z, e, nx, ny = noise.T
    index_driver = sampling_index_driver(n)

    def scale(h):
        if h is None:
            return np.ones(n)
        return scaling_value(h, z if h.driver == "Z" else index_driver)

    sx, sy = scale(hx), scale(hy)
    x = a * z + c * e + sx * nx
    y = b * z + c * e + sy * ny
    data = Dataset(("X", "Y", "Z"), np.column_stack([x, y, z]))
    return SimOutput(data, {"X": sx, "Y": sy, "Z": np.ones(n)})


def random_hetero_assignment(graph: Dag, strength: float, rng: np.random.Generator,
                             fraction: float = 0.3,
                             shapes=(LINEAR, PERIODIC),
                             drivers=("parent", "sampling_index")) -> dict[str, NoiseScaling]:
    """Pick ``round(fraction * d)`` nodes uniformly and give each a random scaling.

    Shape is uniform over ``shapes``; the driver kind is uniform over
    ``drivers``. A parent driver is a uniformly chosen parent; parentless
    nodes fall back to the sampling index.
    """
    d = len(graph.nodes)
    k = int(round(fraction * d))
    chosen = sorted(int(i) for i in rng.choice(d, size=k, replace=False))
    out = {}
    for i in chosen:
        v = graph.nodes[i]
        shape = shapes[int(rng.integers(len(shapes)))]
        kind = drivers[int(rng.integers(len(drivers)))]
        parents = graph.parents(v)
        driver = None
        if kind == "parent" and parents:
            driver = parents[int(rng.integers(len(parents)))]
        out[v] = NoiseScaling(shape, float(strength), driver)
    return out


def random_scm(d: int, m: int, strength: float, rng: np.random.Generator,
               coeff: float = DEFAULT_COEFF, fraction: float = 0.3,
               shapes=(LINEAR, PERIODIC), drivers=("parent", "sampling_index")) -> ScmSpec:
    graph = random_dag(d, m, rng)
    hetero = random_hetero_assignment(graph, strength, rng, fraction, shapes, drivers)
    return ScmSpec.with_default_coefficients(graph, hetero, coeff)


def scaling_for(shape: str, strength: float, driver: str | None) -> NoiseScaling:
    """Convenience constructor accepting ``driver`` in ``{"Z", "index", None}``."""
    if driver in ("index", "sampling_index"):
        driver = None
    if driver is not None and not isinstance(driver, str):
        raise ConfigError(f"bad driver {driver!r}")
    return NoiseScaling(shape, float(strength), driver)
