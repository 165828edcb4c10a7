"""PC-stable causal discovery with a pluggable conditional independence test."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .citest import CITestSpec, run_ci_test
from .data import Dataset
from .errors import ConfigError
from .graph import Cpdag, Dag, _Pdag, apply_meek_rules, d_separated

# ci_test(x, y, cond) -> True if x and y are judged dependent given cond
CITest = Callable[[str, str, tuple], bool]


@dataclass(frozen=True)
class PcConfig:
    alpha: float = 0.05
    ci_spec: CITestSpec = field(default_factory=CITestSpec)
    max_cond_size: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass
class PcResult:
    cpdag: Cpdag
    sepsets: dict  # frozenset({a, b}) -> tuple of conditioning variables
    n_tests: int = 0

    def to_dict(self) -> dict:
        idx = self.cpdag.index.__getitem__
        seps = []
        for pair, s in self.sepsets.items():
            a, b = sorted(pair, key=idx)
            seps.append([a, b, list(s)])
        seps.sort(key=lambda e: (idx(e[0]), idx(e[1])))
        out = self.cpdag.to_dict()
        out["sepsets"] = seps
        return out


def skeleton_search(nodes: Sequence[str], ci_test: CITest,
                    max_cond_size: Optional[int] = None) -> tuple[dict, dict, int]:
    """Stable skeleton phase.

    Conditioning sets at level ``l`` are drawn from the adjacencies as they
    were at the start of that level, which makes the skeleton independent of
    the variable order. Returns ``(adjacency, sepsets, number_of_tests)``.
    """
    nodes = list(nodes)
    index = {v: i for i, v in enumerate(nodes)}
    adj = {v: set(nodes) - {v} for v in nodes}
    sepsets = {}
    n_tests = 0
    level = 0
    while max_cond_size is None or level <= max_cond_size:
        # some pair x-y must have |adj(x) \ {y}| >= level
        if not any(len(adj[x]) > level for x in nodes):
            break
        snapshot = {v: sorted(adj[v], key=index.__getitem__) for v in nodes}
        for x in nodes:
            for y in snapshot[x]:
                if y not in adj[x]:
                    continue
                candidates = [v for v in snapshot[x] if v != y]
                if len(candidates) < level:
                    continue
                for cond in itertools.combinations(candidates, level):
                    n_tests += 1
                    if not ci_test(x, y, cond):
                        adj[x].discard(y)
                        adj[y].discard(x)
                        sepsets[frozenset((x, y))] = tuple(cond)
                        break
        level += 1
    return adj, sepsets, n_tests


def orient(nodes: Sequence[str], adj: Mapping[str, set], sepsets: Mapping) -> Cpdag:
    """Orient colliders from the sepsets, then close under Meek's rules.

    An edge that two colliders would orient in opposite directions is left
    undirected, and the Meek rules do not touch it afterwards.
    """
    nodes = list(nodes)
    index = {v: i for i, v in enumerate(nodes)}
    proposals = {}
    for z in nodes:
        for x, y in itertools.combinations(sorted(adj[z], key=index.__getitem__), 2):
            if y in adj[x]:
                continue
            if z not in sepsets[frozenset((x, y))]:
                proposals.setdefault(frozenset((x, z)), set()).add((x, z))
                proposals.setdefault(frozenset((y, z)), set()).add((y, z))
    directed = set()
    for dirs in proposals.values():
        if len(dirs) == 1:
            directed |= dirs
    undirected = set()
    for x in nodes:
        for y in adj[x]:
            e = frozenset((x, y))
            if e not in proposals or len(proposals[e]) != 1:
                undirected.add(e)
    pdag = _Pdag(nodes, directed, undirected)
    conflicts = [e for e, dirs in proposals.items() if len(dirs) > 1]
    apply_meek_rules(pdag, frozen=conflicts)
    return pdag.to_cpdag()


def pc_from_test(nodes: Sequence[str], ci_test: CITest,
                 max_cond_size: Optional[int] = None) -> PcResult:
    adj, sepsets, n_tests = skeleton_search(nodes, ci_test, max_cond_size)
    return PcResult(orient(nodes, adj, sepsets), sepsets, n_tests)


def oracle_ci(dag: Dag) -> CITest:
    """CI 'test' answering from d-separation in ``dag``."""
    return lambda x, y, cond: not d_separated(dag, x, y, cond)


def pc_stable(data: Dataset, cfg: PcConfig = PcConfig(),
              true_sigma: Optional[Mapping[str, np.ndarray]] = None) -> PcResult:
    """Run PC-stable on ``data`` with the partial-correlation test in ``cfg``."""
    if not np.all(np.isfinite(data.values)):
        raise ConfigError("data contains non-finite values")
    spec = replace(cfg.ci_spec, alpha=cfg.alpha)

    def ci(x, y, cond):
        return run_ci_test(data, x, y, cond, spec, true_sigma).dependent

    return pc_from_test(data.names, ci, cfg.max_cond_size)
