"""Network-to-circuit conversion and its distributed realization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..circuit import CatChain, Circuit, fully_controlled_matrix, teleport_gadget
from ..linalg import I2, kron
from .graphs import NetworkGraph, build_cluster


class ConversionError(ValueError):
    """A requested gate sequence breaks a conversion rule."""

    def __init__(self, message: str, column: int | None = None, gates: tuple = ()):
        super().__init__(message)
        self.column = column
        self.gates = gates


@dataclass(frozen=True)
class CGate:
    """``C_{l;n}`` (one control) or ``C_{l,m;n}`` (two controls); rows are 1-based.

    ``us`` maps control values (an int, or a pair for two controls) to the
    target's single-qubit unitary; missing entries are the identity.
    """

    controls: tuple
    target: int
    us: dict | None = None

    def __post_init__(self):
        if len(self.controls) not in (1, 2):
            raise ConversionError("a gate has one or two controls")
        if self.target in self.controls:
            raise ConversionError("target row cannot also be a control")
        if len(self.controls) == 2:
            l, m = self.controls
            if not (l < self.target < m or m < self.target < l):
                raise ConversionError("C_{l,m;n} needs the target strictly between the controls")

    def gaps(self) -> dict[int, int]:
        """Wire gaps crossed, mapped to the control index used there (gap g sits between rows g and g+1)."""
        out = {}
        for c in self.controls:
            lo, hi = sorted((c, self.target))
            for g in range(lo, hi):
                out[g] = c
        return out

    def matrix(self) -> np.ndarray:
        us = self.us or {}
        return fully_controlled_matrix(us or {0: I2}, len(self.controls))

    def label(self) -> str:
        return f"C_{{{','.join(map(str, self.controls))};{self.target}}}"


@dataclass
class ConvertedCircuitSpec:
    k: int
    n_cols: int
    columns: list[list[CGate]]
    gap_index: list[dict[int, int]] = field(default_factory=list)

    def certificate(self) -> dict:
        return {
            "k": self.k,
            "N": self.n_cols,
            "columns": [[g.label() for g in col] for col in self.columns],
            "gap_index": [{str(k): v for k, v in gi.items()} for gi in self.gap_index],
        }


def _check_column(col: list[CGate], j: int, k: int) -> dict[int, int]:
    gap_owner: dict[int, tuple[int, int]] = {}
    for gi, g in enumerate(col):
        for r in (*g.controls, g.target):
            if not 1 <= r <= k:
                raise ConversionError(f"row {r} outside 1..{k}", j, (gi,))
        for gap, c in g.gaps().items():
            if gap in gap_owner and gap_owner[gap][0] != c:
                raise ConversionError(
                    f"column {j}: gap {gap}|{gap + 1} carries control indices {gap_owner[gap][0]} and {c}",
                    j,
                    (gap_owner[gap][1], gi),
                )
            gap_owner.setdefault(gap, (c, gi))
    for w in range(1, k + 1):
        ctrl = [gi for gi, g in enumerate(col) if w in g.controls]
        if len(ctrl) < 2:
            continue
        for gi, g in enumerate(col):
            if g.target == w and ctrl[0] < gi < ctrl[-1]:
                before = max(c for c in ctrl if c < gi)
                after = min(c for c in ctrl if c > gi)
                raise ConversionError(
                    f"column {j}: target on wire {w} between two of its control dots",
                    j,
                    (before, gi, after),
                )
    return {gap: c for gap, (c, _) in gap_owner.items()}


def convert_network(g: NetworkGraph | tuple[int, int], requested) -> ConvertedCircuitSpec:
    """Check a gate sequence against the conversion rules of a ``(k, N)``-cluster.

    ``requested`` is either a flat list (one gate per column) or a list of
    per-column lists.
    """
    if isinstance(g, tuple):
        k, n = g
    else:
        if g.k is None or g.n_cols is None:
            raise ConversionError("conversion needs a lattice-structured network")
        k, n = g.k, g.n_cols
    if requested and all(isinstance(x, CGate) for x in requested):
        columns = [[x] for x in requested]
    else:
        columns = [list(c) for c in requested]
    if len(columns) > n:
        raise ConversionError(f"{len(columns)} columns requested but the network has {n}")
    columns += [[] for _ in range(n - len(columns))]
    gap_index = [_check_column(col, j + 1, k) for j, col in enumerate(columns)]
    return ConvertedCircuitSpec(k, n, columns, gap_index)


def spec_unitary(spec: ConvertedCircuitSpec, pre: dict | None = None, post: dict | None = None) -> np.ndarray:
    """The k-qubit unitary described by ``spec`` (rows in order 1..k)."""
    pre, post = pre or {}, post or {}
    k = spec.k
    total = np.eye(2**k, dtype=complex)

    def embed(g: CGate) -> np.ndarray:
        rows = list(g.controls) + [g.target]
        m = g.matrix()
        out = np.zeros((2**k, 2**k), dtype=complex)
        for col in range(2**k):
            bits = [(col >> (k - 1 - r)) & 1 for r in range(k)]
            sub = 0
            for r in rows:
                sub = 2 * sub + bits[r - 1]
            for s2 in range(2 ** len(rows)):
                amp = m[s2, sub]
                if amp == 0:
                    continue
                nb = list(bits)
                for t, r in enumerate(rows):
                    nb[r - 1] = (s2 >> (len(rows) - 1 - t)) & 1
                row = int("".join(map(str, nb)), 2)
                out[row, col] += amp
        return out

    for j, col in enumerate(spec.columns, start=1):
        layer = kron(*[pre.get((i, j), I2) for i in range(1, k + 1)])
        total = layer @ total
        for g in col:
            total = embed(g) @ total
        layer = kron(*[post.get((i, j), I2) for i in range(1, k + 1)])
        total = layer @ total
    return total


def realize_converted(
    spec: ConvertedCircuitSpec,
    network: NetworkGraph | None = None,
    pre: dict | None = None,
    post: dict | None = None,
    fixed_inputs: dict | None = None,
    circuit: Circuit | None = None,
    row_wires: dict | None = None,
    tag: str = "",
) -> Circuit:
    """LOCC circuit over the cluster realizing the spec.

    ``pre``/``post`` map ``(row, column)`` to single-qubit unitaries applied
    before and after the column's controlled gates. Rows in
    ``fixed_inputs`` start in ``|0>`` instead of being circuit inputs.
    Controls reach their targets through cat-entangler chains on vertical
    EPR pairs; wires move between columns by teleportation on horizontal
    ones.
    """
    network = network or build_cluster(spec.k, spec.n_cols)
    pre, post, fixed_inputs = pre or {}, post or {}, fixed_inputs or {}
    k = spec.k
    node = lambda i, j: network.node_at(i, j)  # noqa: E731
    c = circuit if circuit is not None else Circuit()
    current: dict[int, str] = {}
    for i in range(1, k + 1):
        if row_wires and i in row_wires:
            current[i] = row_wires[i]
        elif i in fixed_inputs:
            current[i] = f"{tag}q{i}"
            c.alloc(current[i], node(i, 1))
        else:
            current[i] = c.add_wire(f"{tag}q{i}", node(i, 1))

    for j, col in enumerate(spec.columns, start=1):
        epr_used = 0
        for i in range(1, k + 1):
            if (i, j) in pre:
                c.u(pre[(i, j)], current[i], name="pre")
        chains: dict[int, CatChain] = {}
        for gi, g in enumerate(col):
            copies = []
            for ctl in g.controls:
                if ctl not in chains:
                    chains[ctl] = CatChain(c, current[ctl], node(ctl, j), f"{tag}c{j}.r{ctl}")
                ch = chains[ctl]
                step = 1 if g.target > ctl else -1
                for r in range(ctl + step, g.target + step, step):
                    if node(r, j) not in ch.copies:
                        a, b = node(r - step, j), node(r, j)
                        ch.extend(a, b, network.edge_between(a, b))
                        epr_used += 1
                copies.append(ch.copies[node(g.target, j)])
            c.u(g.matrix(), copies + [current[g.target]], name=g.label())
            for ctl in g.controls:
                if not any(ctl in h.controls for h in col[gi + 1 :]):
                    chains.pop(ctl).close()
        if epr_used > k - 1:
            raise RuntimeError(f"column {j} consumed {epr_used} EPR pairs, budget {k - 1}")
        for i in range(1, k + 1):
            if (i, j) in post:
                c.u(post[(i, j)], current[i], name="post")
        if j < spec.n_cols:
            for i in range(1, k + 1):
                a, b = node(i, j), node(i, j + 1)
                ea, eb = f"{tag}t{i}_{j}a", f"{tag}t{i}_{j}b"
                c.epr(ea, eb, a, b, network.edge_between(a, b))
                c.extend(teleport_gadget(current[i], ea, eb, (f"{tag}t{i}_{j}.m1", f"{tag}t{i}_{j}.m2")))
                current[i] = eb
    c.outputs = [current[i] for i in range(1, k + 1)]
    return c
