"""Focused generalized flow on open graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from .graphs import NetworkGraph


@dataclass
class GflowResult:
    exists: bool
    g: dict = field(default_factory=dict)
    layers: list = field(default_factory=list)
    unsolved: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "exists": self.exists,
            "g": {str(k): sorted(map(str, v)) for k, v in self.g.items()},
            "layers": [sorted(map(str, layer)) for layer in self.layers],
            "unsolved": sorted(map(str, self.unsolved)),
        }


def _adjacency(graph) -> tuple[list, dict]:
    if isinstance(graph, NetworkGraph):
        nodes = list(graph.nodes)
        pairs = list(graph.edges.values())
    else:
        nodes, pairs = list(graph[0]), list(graph[1])
    adj = {n: set() for n in nodes}
    for a, b in pairs:
        if a == b:
            raise ValueError("self-loops are not allowed in an open graph")
        adj[a].add(b)
        adj[b].add(a)
    return nodes, adj


def odd_neighbourhood(adj: dict, k) -> set:
    """Vertices with an odd number of neighbours in ``k``."""
    return {u for u in adj if len(adj[u] & set(k)) % 2 == 1}


def _solve_gf2(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution of ``a x = b`` over GF(2), or ``None``."""
    a = a.copy() % 2
    b = b.copy() % 2
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        hit = next((i for i in range(r, rows) if a[i, c]), None)
        if hit is None:
            continue
        a[[r, hit]] = a[[hit, r]]
        b[[r, hit]] = b[[hit, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
                b[i] ^= b[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if np.any(b[r:]):
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = b[i]
    return x


def find_focused_gflow(graph, inputs=None, outputs=None) -> GflowResult:
    """Decide whether ``(G, I, O)`` has a focused gflow and return one if so.

    Works backwards from the outputs: a vertex ``u`` is solved once some
    ``K`` inside the already-solved non-inputs has ``Odd(K)`` meeting the
    non-outputs exactly in ``{u}``. The constraint on ``K`` is linear over
    GF(2), and solvability only grows with the solved set, so the greedy
    layering is complete.
    """
    nodes, adj = _adjacency(graph)
    if isinstance(graph, NetworkGraph):
        inputs = graph.inputs if inputs is None else inputs
        outputs = graph.outputs if outputs is None else outputs
    inputs, outputs = set(inputs or ()), set(outputs or ())
    non_out = [n for n in nodes if n not in outputs]
    solved = set(outputs)
    g: dict = {}
    layers = [sorted(outputs, key=str)]
    while True:
        cand = [n for n in nodes if n in solved and n not in inputs]
        layer = []
        for u in non_out:
            if u in solved:
                continue
            a = np.array([[1 if v in adj[w] else 0 for v in cand] for w in non_out], dtype=np.int64).reshape(len(non_out), len(cand))
            b = np.array([1 if w == u else 0 for w in non_out], dtype=np.int64)
            x = _solve_gf2(a, b) if cand else None
            if x is not None:
                g[u] = {v for v, bit in zip(cand, x) if bit}
                layer.append(u)
        if not layer:
            break
        solved |= set(layer)
        layers.append(sorted(layer, key=str))
    unsolved = [n for n in non_out if n not in solved]
    if unsolved:
        return GflowResult(False, {}, [], unsolved)
    return GflowResult(True, g, layers[::-1], [])


def check_focused_gflow(graph, inputs, outputs, g: dict) -> bool:
    """Check a candidate focused gflow: domain, codomain, focus and acyclicity."""
    nodes, adj = _adjacency(graph)
    inputs, outputs = set(inputs), set(outputs)
    non_out = {n for n in nodes if n not in outputs}
    if set(g) != non_out:
        return False
    for u, k in g.items():
        if set(k) & inputs or u in k:
            return False
        if odd_neighbourhood(adj, k) & non_out != {u}:
            return False
    # i < j for every j in g(i) must extend to a strict partial order
    indeg = {n: 0 for n in nodes}
    for u, k in g.items():
        for v in k:
            indeg[v] += 1
    ready = [n for n in nodes if indeg[n] == 0]
    seen = 0
    while ready:
        n = ready.pop()
        seen += 1
        for v in g.get(n, ()):
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    return seen == len(nodes)


def brute_force_focused_gflow(graph, inputs, outputs) -> dict | None:
    """Exhaustive search over all assignments; exponential, for small graphs only."""
    nodes, adj = _adjacency(graph)
    inputs, outputs = set(inputs), set(outputs)
    non_out = [n for n in nodes if n not in outputs]
    non_in = [n for n in nodes if n not in inputs]
    options = []
    for u in non_out:
        opts = []
        pool = [v for v in non_in if v != u]
        for r in range(len(pool) + 1):
            for k in combinations(pool, r):
                if odd_neighbourhood(adj, k) & set(non_out) == {u}:
                    opts.append(set(k))
        if not opts:
            return None
        options.append(opts)
    for choice in product(*options):
        g = dict(zip(non_out, choice))
        if check_focused_gflow(graph, inputs, outputs, g):
            return g
    return None
