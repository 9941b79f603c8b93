"""Network graphs, cluster constructions and resource states."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..linalg import check_dim, partial_trace, permute_subsystems


@dataclass(frozen=True)
class NetworkGraph:
    """Directed network ``G = {V, E, I, O}`` with optional lattice structure.

    ``edges`` maps an edge id to its ordered node pair. ``vertical`` and
    ``horizontal`` list edge ids of the lattice classes.
    """

    nodes: tuple
    edges: dict
    inputs: tuple
    outputs: tuple
    coords: dict = field(default_factory=dict)
    vertical: tuple = ()
    horizontal: tuple = ()
    kind: str = "named"
    name: str = ""
    k: int | None = None
    n_cols: int | None = None

    def __post_init__(self):
        ns = set(self.nodes)
        if not set(self.inputs) <= ns or not set(self.outputs) <= ns:
            raise ValueError("inputs and outputs must be nodes")
        for e, (a, b) in self.edges.items():
            if a not in ns or b not in ns:
                raise ValueError(f"edge {e!r} references unknown node")

    def edge_between(self, a, b):
        for e, (x, y) in self.edges.items():
            if {x, y} == {a, b}:
                return e
        return None

    def node_at(self, i: int, j: int):
        for n, c in self.coords.items():
            if c == (i, j):
                return n
        raise KeyError((i, j))

    def neighbours(self, n) -> set:
        out = set()
        for a, b in self.edges.values():
            if a == n:
                out.add(b)
            elif b == n:
                out.add(a)
        return out

    def relabel(self, node_map: dict, edge_map: dict, name: str = "") -> "NetworkGraph":
        return NetworkGraph(
            tuple(node_map.get(n, n) for n in self.nodes),
            {edge_map.get(e, e): (node_map.get(a, a), node_map.get(b, b)) for e, (a, b) in self.edges.items()},
            tuple(node_map.get(n, n) for n in self.inputs),
            tuple(node_map.get(n, n) for n in self.outputs),
            {node_map.get(n, n): c for n, c in self.coords.items()},
            tuple(edge_map.get(e, e) for e in self.vertical),
            tuple(edge_map.get(e, e) for e in self.horizontal),
            "named",
            name or self.name,
            self.k,
            self.n_cols,
        )

    def to_json(self) -> dict:
        nodes = []
        for n in self.nodes:
            rec = {"id": n}
            if n in self.coords:
                rec["i"], rec["j"] = self.coords[n]
            nodes.append(rec)
        return {
            "name": self.name,
            "nodes": nodes,
            "edges": [[a, b] for a, b in self.edges.values()],
            "edge_ids": list(self.edges),
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "class": self.kind,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NetworkGraph":
        nodes = tuple(n["id"] for n in obj["nodes"])
        coords = {n["id"]: (n["i"], n["j"]) for n in obj["nodes"] if "i" in n and "j" in n}
        ids = obj.get("edge_ids") or [f"e{t}" for t in range(len(obj["edges"]))]
        edges = {e: tuple(p) for e, p in zip(ids, obj["edges"])}
        vertical = tuple(e for e, (a, b) in edges.items() if a in coords and b in coords and coords[a][1] == coords[b][1])
        horizontal = tuple(e for e, (a, b) in edges.items() if a in coords and b in coords and coords[a][0] == coords[b][0])
        return cls(nodes, edges, tuple(obj["inputs"]), tuple(obj["outputs"]), coords, vertical, horizontal, obj.get("class", "named"), obj.get("name", ""))


def _v(i: int, j: int) -> str:
    return f"v{i}_{j}"


def build_cluster(k: int, n: int) -> NetworkGraph:
    """The ``(k, N)``-cluster network: ``k`` rows, ``N`` columns, nearest-neighbour edges."""
    if k < 1 or n < 1:
        raise ValueError("k and N must be at least 1")
    nodes = tuple(_v(i, j) for j in range(1, n + 1) for i in range(1, k + 1))
    coords = {_v(i, j): (i, j) for i in range(1, k + 1) for j in range(1, n + 1)}
    edges, vertical, horizontal = {}, [], []
    for j in range(1, n + 1):
        for i in range(1, k):
            e = f"S{i}_{j}"
            edges[e] = (_v(i, j), _v(i + 1, j))
            vertical.append(e)
    for i in range(1, k + 1):
        for j in range(1, n):
            e = f"K{i}_{j}"
            edges[e] = (_v(i, j), _v(i, j + 1))
            horizontal.append(e)
    return NetworkGraph(
        nodes,
        edges,
        tuple(_v(i, 1) for i in range(1, k + 1)),
        tuple(_v(i, n) for i in range(1, k + 1)),
        coords,
        tuple(vertical),
        tuple(horizontal),
        "cluster",
        f"({k},{n})-cluster",
        k,
        n,
    )


def build_generalized(k: int, n: int, vertical: list[tuple[int, int, int]]) -> NetworkGraph:
    """Generalized cluster: horizontal edges as in a cluster, vertical edges any ``(m, n', j)`` pairs, ``m < n'``."""
    base = build_cluster(k, n)
    edges = {e: base.edges[e] for e in base.horizontal}
    vert = []
    for m, p, j in vertical:
        if not (1 <= m < p <= k and 1 <= j <= n):
            raise ValueError(f"vertical edge {(m, p, j)} is not in the complete vertical set")
        e = f"S{m}.{p}_{j}"
        edges[e] = (_v(m, j), _v(p, j))
        vert.append(e)
    return NetworkGraph(
        base.nodes,
        edges,
        base.inputs,
        base.outputs,
        base.coords,
        tuple(vert),
        base.horizontal,
        "generalized",
        f"generalized ({k},{n})-cluster",
        k,
        n,
    )


# Butterfly = (3,2)-cluster with relabelled nodes and edges.
BUTTERFLY_NODE_MAP = {"v1_1": "i1", "v2_1": "n1", "v3_1": "i2", "v1_2": "o1", "v2_2": "n2", "v3_2": "o2"}
BUTTERFLY_EDGE_MAP = {"K1_1": "E1", "K2_1": "E5", "K3_1": "E3", "S1_1": "E2", "S2_1": "E4", "S1_2": "E6", "S2_2": "E7"}

# Grail rows: (n1, n2, o1) and (i2, n3, n4); E1 and E2 attach i1 and o2.
GRAIL_NODE_MAP = {"v1_1": "n1", "v1_2": "n2", "v1_3": "o1", "v2_1": "i2", "v2_2": "n3", "v2_3": "n4"}
GRAIL_EDGE_MAP = {"K1_1": "E3", "K1_2": "E4", "K2_1": "E5", "K2_2": "E6", "S1_1": "E7", "S1_2": "E8", "S1_3": "E9"}

SQUARE_NODE_MAP = {"v1_1": "i1", "v1_2": "o1", "v2_1": "i2", "v2_2": "o2"}


def build_named(name: str) -> NetworkGraph:
    name = name.lower()
    if name == "butterfly":
        g = build_cluster(3, 2).relabel(BUTTERFLY_NODE_MAP, BUTTERFLY_EDGE_MAP, "butterfly")
        directed = {
            "E1": ("i1", "o1"),
            "E2": ("i1", "n1"),
            "E3": ("i2", "o2"),
            "E4": ("i2", "n1"),
            "E5": ("n1", "n2"),
            "E6": ("n2", "o1"),
            "E7": ("n2", "o2"),
        }
        return NetworkGraph(
            g.nodes,
            directed,
            ("i1", "i2"),
            ("o1", "o2"),
            g.coords,
            g.vertical,
            g.horizontal,
            "named",
            "butterfly",
        )
    if name == "grail":
        g = build_cluster(2, 3).relabel(GRAIL_NODE_MAP, GRAIL_EDGE_MAP, "grail")
        edges = {"E1": ("i1", "n1"), "E2": ("n4", "o2")}
        for e in ["E3", "E4", "E5", "E6", "E7", "E8", "E9"]:
            edges[e] = g.edges[e]
        nodes = ("i1", "i2", "n1", "n2", "n3", "n4", "o1", "o2")
        return NetworkGraph(nodes, edges, ("i1", "i2"), ("o1", "o2"), g.coords, g.vertical, g.horizontal, "named", "grail")
    if name == "square":
        g = build_cluster(2, 2).relabel(SQUARE_NODE_MAP, {}, "square")
        return NetworkGraph(g.nodes, g.edges, ("i1", "i2"), ("o1", "o2"), g.coords, g.vertical, g.horizontal, "named", "square")
    raise ValueError(f"unknown network {name!r}; expected butterfly, grail or square")


@dataclass(frozen=True)
class ResourceState:
    """Tensor product of one ``|Phi+>`` per edge.

    ``registry`` lists ``(qubit label, node)`` in state order; qubits
    ``2e`` and ``2e+1`` form the pair of the ``e``-th edge. The dense vector
    is built on demand and is subject to the global dimension limit.
    """

    registry: tuple
    edges: tuple

    @property
    def n_qubits(self) -> int:
        return len(self.registry)

    @property
    def n_pairs(self) -> int:
        return len(self.edges)

    def dense(self) -> np.ndarray:
        """State vector of all ``2|E|`` qubits."""
        check_dim(2**self.n_qubits)
        state = np.ones(1, dtype=complex)
        for _ in self.edges:
            state = np.kron(state, EPR)
        return state

    def reduced(self, qubits) -> np.ndarray:
        """Reduced density matrix of the listed qubit indices (in the given order)."""
        qubits = list(qubits)
        pairs = sorted({q // 2 for q in qubits})
        local = list(pairs)
        state = np.ones(1, dtype=complex)
        for _ in local:
            state = np.kron(state, EPR)
        index = {q: 2 * local.index(q // 2) + (q % 2) for q in qubits}
        n = 2 * len(local)
        rho = np.outer(state, state.conj())
        keep = [index[q] for q in qubits]
        red = partial_trace(rho, [2] * n, sorted(keep))
        order = sorted(keep)
        perm = [order.index(k) for k in keep]
        return permute_subsystems(red, [2] * len(keep), perm)


EPR = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def resource_registry(g: NetworkGraph) -> list[tuple[str, str, str]]:
    """``(qubit label, node, edge)`` for both halves of every edge's EPR pair.

    Lattice labels follow ``S1/S2`` for vertical and ``K1/K2`` for horizontal
    edges; the first half sits at the edge's first node.
    """
    out = []
    for e, (a, b) in g.edges.items():
        if e in g.vertical:
            pa, pb = "S1", "S2"
        elif e in g.horizontal:
            pa, pb = "K1", "K2"
        else:
            pa, pb = "E1", "E2"
        out.append((f"{pa}[{e}]", a, e))
        out.append((f"{pb}[{e}]", b, e))
    return out


def build_resource_state(g: NetworkGraph) -> ResourceState:
    """Resource state for any network; edge direction is ignored."""
    reg = resource_registry(g)
    return ResourceState(tuple((q, node) for q, node, _ in reg), tuple(g.edges))
