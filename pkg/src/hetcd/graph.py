"""DAGs, CPDAGs, d-separation and Markov-equivalence completion."""
from __future__ import annotations

import itertools
import json
from collections import deque
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidSpec, TooManyEdges, UnknownNode

DIRECTED = "->"
UNDIRECTED = "--"


def _check_nodes(nodes: Sequence[str]) -> tuple:
    nodes = tuple(str(v) for v in nodes)
    if len(set(nodes)) != len(nodes):
        raise InvalidSpec("duplicate node names")
    return nodes


class Dag:
    """Immutable directed acyclic graph over named nodes."""

    def __init__(self, nodes: Sequence[str], edges: Iterable[tuple[str, str]] = ()):
        self.nodes = _check_nodes(nodes)
        self.index = {v: i for i, v in enumerate(self.nodes)}
        edge_list = [(str(a), str(b)) for a, b in edges]
        for a, b in edge_list:
            if a not in self.index or b not in self.index:
                raise UnknownNode(f"edge {a}->{b} references an unknown node")
            if a == b:
                raise InvalidSpec(f"self-loop on {a}")
        if len(set(edge_list)) != len(edge_list):
            raise InvalidSpec("duplicate edges")
        pairs = {frozenset(e) for e in edge_list}
        if len(pairs) != len(edge_list):
            raise InvalidSpec("both orientations of an edge present")
        self.edges = frozenset(edge_list)
        self._parents = {v: [] for v in self.nodes}
        self._children = {v: [] for v in self.nodes}
        for a, b in sorted(self.edges, key=lambda e: (self.index[e[0]], self.index[e[1]])):
            self._parents[b].append(a)
            self._children[a].append(b)
        self._order = self._toposort()

    def _toposort(self) -> tuple:
        indeg = {v: len(self._parents[v]) for v in self.nodes}
        ready = deque(v for v in self.nodes if indeg[v] == 0)
        order = []
        while ready:
            v = ready.popleft()
            order.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != len(self.nodes):
            raise InvalidSpec("graph contains a directed cycle")
        return tuple(order)

    def parents(self, v: str) -> list[str]:
        return list(self._parents[self._node(v)])

    def children(self, v: str) -> list[str]:
        return list(self._children[self._node(v)])

    def topological_order(self) -> tuple:
        return self._order

    def ancestors(self, vs: Iterable[str]) -> set[str]:
        """``vs`` together with all their ancestors."""
        seen = set()
        stack = [self._node(v) for v in vs]
        while stack:
            v = stack.pop()
            if v not in seen:
                seen.add(v)
                stack.extend(self._parents[v])
        return seen

    def skeleton(self) -> frozenset:
        return frozenset(frozenset(e) for e in self.edges)

    def _node(self, v: str) -> str:
        if v not in self.index:
            raise UnknownNode(v)
        return v

    def __eq__(self, other):
        return isinstance(other, Dag) and set(self.nodes) == set(other.nodes) and self.edges == other.edges

    def __hash__(self):
        return hash((frozenset(self.nodes), self.edges))

    def __repr__(self):
        edges = ", ".join(f"{a}->{b}" for a, b in sorted(self.edges))
        return f"Dag(nodes={list(self.nodes)}, edges=[{edges}])"

    def to_dict(self) -> dict:
        edges = sorted(self.edges, key=lambda e: (self.index[e[0]], self.index[e[1]]))
        return {"nodes": list(self.nodes), "edges": [[a, b, DIRECTED] for a, b in edges]}

    @classmethod
    def from_dict(cls, obj: dict) -> "Dag":
        edges = []
        for e in obj["edges"]:
            if len(e) == 3 and e[2] != DIRECTED:
                raise InvalidSpec(f"DAG edge {e} is not directed")
            edges.append((e[0], e[1]))
        return cls(obj["nodes"], edges)


class Cpdag:
    """Partially directed graph with at most one edge per node pair.

    ``directed`` holds ordered pairs ``(a, b)`` for ``a -> b``; ``undirected``
    holds two-element frozensets.
    """

    def __init__(self, nodes: Sequence[str], directed: Iterable[tuple[str, str]] = (),
                 undirected: Iterable[Iterable[str]] = ()):
        self.nodes = _check_nodes(nodes)
        self.index = {v: i for i, v in enumerate(self.nodes)}
        self.directed = frozenset((str(a), str(b)) for a, b in directed)
        self.undirected = frozenset(frozenset(str(v) for v in e) for e in undirected)
        seen = set()
        for e in [frozenset(d) for d in self.directed] + list(self.undirected):
            if len(e) != 2:
                raise InvalidSpec(f"invalid edge {set(e)}")
            if not e <= set(self.index):
                raise UnknownNode(f"edge {set(e)} references an unknown node")
            if e in seen:
                raise InvalidSpec(f"more than one edge between {sorted(e)}")
            seen.add(e)
        self._adj = {v: set() for v in self.nodes}
        for e in seen:
            a, b = tuple(e)
            self._adj[a].add(b)
            self._adj[b].add(a)

    def adjacent(self, a: str, b: str) -> bool:
        return b in self._adj[a]

    def neighbors(self, v: str) -> set[str]:
        """All nodes adjacent to ``v`` regardless of edge mark."""
        return set(self._adj[v])

    def skeleton(self) -> frozenset:
        return frozenset(frozenset(d) for d in self.directed) | self.undirected

    def mark(self, a: str, b: str) -> str | None:
        """Mark at the ``b`` end of the ``a``-``b`` edge: ``'>'``, ``'-'`` or None."""
        if (a, b) in self.directed:
            return ">"
        if (b, a) in self.directed or frozenset((a, b)) in self.undirected:
            return "-"
        return None

    def relabel(self, mapping: dict) -> "Cpdag":
        return Cpdag([mapping[v] for v in self.nodes],
                     [(mapping[a], mapping[b]) for a, b in self.directed],
                     [[mapping[v] for v in e] for e in self.undirected])

    def __eq__(self, other):
        return (isinstance(other, Cpdag) and set(self.nodes) == set(other.nodes)
                and self.directed == other.directed and self.undirected == other.undirected)

    def __hash__(self):
        return hash((frozenset(self.nodes), self.directed, self.undirected))

    def __repr__(self):
        parts = [f"{a}->{b}" for a, b in sorted(self.directed)]
        parts += ["{}--{}".format(*sorted(e)) for e in sorted(self.undirected, key=sorted)]
        return f"Cpdag(nodes={list(self.nodes)}, edges=[{', '.join(parts)}])"

    def to_dict(self) -> dict:
        key = self.index.__getitem__
        edges = [[a, b, DIRECTED] for a, b in self.directed]
        edges += [sorted(e, key=key) + [UNDIRECTED] for e in self.undirected]
        edges.sort(key=lambda e: (key(e[0]), key(e[1])))
        return {"nodes": list(self.nodes), "edges": edges}

    @classmethod
    def from_dict(cls, obj: dict) -> "Cpdag":
        directed, undirected = [], []
        for a, b, mark in obj["edges"]:
            if mark == DIRECTED:
                directed.append((a, b))
            elif mark == UNDIRECTED:
                undirected.append((a, b))
            else:
                raise InvalidSpec(f"unknown edge mark {mark!r}")
        return cls(obj["nodes"], directed, undirected)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def d_separated(g: Dag, x: str, y: str, z: Iterable[str] = ()) -> bool:
    """True iff ``z`` blocks every path between ``x`` and ``y`` in ``g``.

    Reachability search over (node, direction) states; a collider passes
    only if it is in ``z`` or has a descendant in ``z``.
    """
    z = set(z)
    for v in [x, y, *z]:
        if v not in g.index:
            raise UnknownNode(v)
    if x == y or x in z or y in z:
        raise ValueError("x and y must be distinct and outside the conditioning set")
    opens_collider = g.ancestors(z)
    # "up": arrived from a child (or start); "down": arrived from a parent
    todo = deque([(x, "up")])
    visited = set()
    while todo:
        v, direction = todo.popleft()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))
        if v == y:
            return False
        if direction == "up":
            if v not in z:
                todo.extend((p, "up") for p in g._parents[v])
                todo.extend((c, "down") for c in g._children[v])
        else:
            if v not in z:
                todo.extend((c, "down") for c in g._children[v])
            if v in opens_collider:
                todo.extend((p, "up") for p in g._parents[v])
    return True


class _Pdag:
    """Mutable working copy used while orienting edges."""

    def __init__(self, nodes, directed, undirected):
        self.nodes = tuple(nodes)
        self.index = {v: i for i, v in enumerate(self.nodes)}
        self.dir = set(directed)
        self.und = {frozenset(e) for e in undirected}
        self.adj = {v: set() for v in self.nodes}
        for a, b in self.dir:
            self.adj[a].add(b)
            self.adj[b].add(a)
        for e in self.und:
            a, b = tuple(e)
            self.adj[a].add(b)
            self.adj[b].add(a)

    def is_und(self, a, b):
        return frozenset((a, b)) in self.und

    def orient(self, a, b):
        self.und.discard(frozenset((a, b)))
        self.dir.add((a, b))

    def parents(self, v):
        return [p for p in self.adj[v] if (p, v) in self.dir]

    def to_cpdag(self) -> Cpdag:
        return Cpdag(self.nodes, self.dir, self.und)


def _meek_implies(g: _Pdag, a: str, b: str) -> bool:
    """Whether one of Meek's rules 1-4 forces the undirected ``a -- b`` into ``a -> b``."""
    adj = g.adj
    # R1: c -> a -- b, c and b non-adjacent
    for c in adj[a]:
        if (c, a) in g.dir and c != b and b not in adj[c]:
            return True
    # R2: a -> c -> b
    for c in adj[a]:
        if (a, c) in g.dir and (c, b) in g.dir:
            return True
    und_a = [c for c in adj[a] if c != b and g.is_und(a, c)]
    # R3: a -- c -> b, a -- d -> b, c and d non-adjacent
    into_b = [c for c in und_a if (c, b) in g.dir]
    for c, d in itertools.combinations(into_b, 2):
        if d not in adj[c]:
            return True
    # R4: a -- c -> d -> b, c and b non-adjacent, a adjacent to d
    for c in und_a:
        if b in adj[c]:
            continue
        for d in adj[c]:
            if (c, d) in g.dir and (d, b) in g.dir and d in adj[a]:
                return True
    return False


def apply_meek_rules(g: _Pdag, frozen: Iterable[frozenset] = ()) -> None:
    """Orient edges by Meek rules 1-4 until no rule applies.

    Edges listed in ``frozen`` are never oriented.
    """
    frozen = {frozenset(e) for e in frozen}
    changed = True
    while changed:
        changed = False
        edges = sorted((tuple(sorted(e, key=g.index.__getitem__)) for e in g.und),
                       key=lambda e: (g.index[e[0]], g.index[e[1]]))
        for a, b in edges:
            if not g.is_und(a, b) or frozenset((a, b)) in frozen:
                continue
            if _meek_implies(g, a, b):
                g.orient(a, b)
                changed = True
            elif _meek_implies(g, b, a):
                g.orient(b, a)
                changed = True


def meek_closure(cpdag: Cpdag) -> Cpdag:
    g = _Pdag(cpdag.nodes, cpdag.directed, cpdag.undirected)
    apply_meek_rules(g)
    return g.to_cpdag()


def v_structures(g: Dag) -> set[tuple[str, str, str]]:
    """Triples ``(a, c, b)`` with ``a -> c <- b``, ``a`` and ``b`` non-adjacent, ``a < b`` by index."""
    skel = g.skeleton()
    out = set()
    for c in g.nodes:
        for a, b in itertools.combinations(g._parents[c], 2):
            if frozenset((a, b)) not in skel:
                if g.index[a] > g.index[b]:
                    a, b = b, a
                out.add((a, c, b))
    return out


def cpdag_of(g: Dag) -> Cpdag:
    """CPDAG of the Markov equivalence class containing ``g``."""
    directed = set()
    for a, c, b in v_structures(g):
        directed.add((a, c))
        directed.add((b, c))
    undirected = [tuple(e) for e in g.edges if e not in directed]
    pdag = _Pdag(g.nodes, directed, undirected)
    apply_meek_rules(pdag)
    return pdag.to_cpdag()


def random_dag(d: int, m: int, rng: np.random.Generator, names: Sequence[str] | None = None) -> Dag:
    """Random DAG: uniform random causal order, then ``m`` of the order-respecting
    pairs drawn uniformly without replacement."""
    if names is None:
        names = [f"X{i}" for i in range(d)]
    if len(names) != d:
        raise InvalidSpec("number of names differs from d")
    max_edges = d * (d - 1) // 2
    if not 0 <= m <= max_edges:
        raise TooManyEdges(f"cannot place {m} edges on {d} nodes (max {max_edges})")
    order = rng.permutation(d)
    pairs = list(itertools.combinations(range(d), 2))
    chosen = rng.choice(len(pairs), size=m, replace=False) if m else []
    edges = []
    for k in sorted(int(c) for c in chosen):
        i, j = pairs[k]
        edges.append((names[order[i]], names[order[j]]))
    return Dag(names, edges)
