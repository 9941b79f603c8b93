"""Local discrimination of orthonormal bases and the entanglement it needs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, circuit_channel, locc_validate, teleport_gadget
from .decomp import operator_schmidt, operator_schmidt_rank
from .linalg import TOL, H, as_state
from .locc_star import NINE_STATE_FACTORS
from .netcode.graphs import NetworkGraph
from .ops import choi_of_unitary

SUPPORT_FLOOR = TOL.support_floor
OVERLAP_TOL = TOL.overlap


class FamilyError(ValueError):
    """Dimensions outside the range where a basis family is defined."""


@dataclass(frozen=True)
class DiscriminationEnsemble:
    states: tuple
    dims: tuple
    name: str = ""
    basis: bool = True

    def __post_init__(self):
        da, db = self.dims
        sts = tuple(as_state(s) for s in self.states)
        for s in sts:
            if s.size != da * db:
                raise ValueError("state does not match the party dimensions")
        g = np.array([[np.vdot(a, b) for b in sts] for a in sts])
        if np.abs(g - np.eye(len(sts))).max() > 1e-10:
            raise ValueError("ensemble states are not orthonormal")
        if self.basis and len(sts) != da * db:
            raise ValueError("a basis needs d_A d_B states")
        object.__setattr__(self, "states", sts)
        object.__setattr__(self, "dims", (int(da), int(db)))

    def __len__(self) -> int:
        return len(self.states)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dims": list(self.dims),
            "states": [{"re": s.real.tolist(), "im": s.imag.tolist()} for s in self.states],
        }


def _vec(terms: dict, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    for j, c in terms.items():
        v[j] += c
    return v / np.linalg.norm(v)


def nine_states() -> DiscriminationEnsemble:
    """The nine product states on ``3 (x) 3``; label ``k`` is ``states[k-1]``."""
    sts = [np.kron(_vec(a, 3), _vec(b, 3)) for a, b in NINE_STATE_FACTORS]
    return DiscriminationEnsemble(tuple(sts), (3, 3), "nine")


def generalized_basis(d_a: int, d_b: int) -> DiscriminationEnsemble:
    """Orthogonal product basis generalizing the nine states; kets ``|1>..|d>`` sit at indices ``0..d-1``.

    Each listed vector is normalized.
    """
    if d_a < 4 or d_b < 3:
        raise FamilyError(f"generalized basis needs d_A >= 4 and d_B >= 3, got ({d_a}, {d_b})")

    def ka(k):
        return _vec({k - 1: 1}, d_a)

    def kb(k):
        return _vec({k - 1: 1}, d_b)

    def fourier(lo, hi, m, n, d):
        return _vec({k - 1: np.exp(2j * np.pi * m * (k - lo) / n) for k in range(lo, hi + 1)}, d)

    sts = []
    for s in (1, -1):
        sts.append(np.kron(ka(1), _vec({0: 1, 1: s}, d_b)))
    for s in (1, -1):
        sts.append(np.kron(_vec({d_a - 2: 1, d_a - 1: s}, d_a), kb(1)))
    for m1 in range(d_a - 3):
        sts.append(np.kron(fourier(2, d_a - 2, m1, d_a - 3, d_a), kb(1)))
    for m2 in range(d_a - 2):
        sts.append(np.kron(fourier(2, d_a - 1, m2, d_a - 2, d_a), kb(2)))
    for m3 in range(d_b - 1):
        sts.append(np.kron(ka(d_a), fourier(2, d_b, m3, d_b - 1, d_b)))
    for m5 in range(d_b - 2):
        for m4 in range(d_a - 1):
            sts.append(np.kron(fourier(1, d_a - 1, m4, d_a - 1, d_a), kb(m5 + 3)))
    return DiscriminationEnsemble(tuple(sts), (d_a, d_b), f"generalized({d_a},{d_b})")


def computational_basis(d_a: int, d_b: int) -> DiscriminationEnsemble:
    sts = []
    for j in range(d_a * d_b):
        v = np.zeros(d_a * d_b, dtype=complex)
        v[j] = 1
        sts.append(v)
    return DiscriminationEnsemble(tuple(sts), (d_a, d_b), "computational")


# ---------------------------------------------------------------------------
# d_min


def a_support(state, dims, floor: float = SUPPORT_FLOOR) -> np.ndarray:
    """Orthonormal columns spanning the support of ``tr_B |psi><psi|``."""
    m = np.asarray(state).reshape(dims)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    return u[:, s**2 > floor]


def overlaps(s1: np.ndarray, s2: np.ndarray, tol: float = OVERLAP_TOL) -> bool:
    """Whether two subspaces are not orthogonal (largest principal-angle cosine above ``tol``)."""
    if s1.shape[1] == 0 or s2.shape[1] == 0:
        return False
    return bool(np.linalg.norm(s1.conj().T @ s2, 2) > tol)


def _span(cols: list[np.ndarray], floor: float = SUPPORT_FLOOR) -> np.ndarray:
    m = np.hstack(cols)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    return u[:, s > np.sqrt(floor)]


@dataclass
class SubspacePartition:
    bases: list  # orthonormal columns per block
    assignment: tuple  # state index -> block index

    @property
    def projectors(self) -> list[np.ndarray]:
        return [b @ b.conj().T for b in self.bases]

    @property
    def block_dims(self) -> list[int]:
        return [b.shape[1] for b in self.bases]

    @property
    def max_dim(self) -> int:
        return max(self.block_dims)

    def validate(self, ens: DiscriminationEnsemble, tol: float = 1e-9) -> bool:
        da, db = ens.dims
        ps = self.projectors
        if np.linalg.norm(sum(ps) - np.eye(da)) > tol:
            return False
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                if np.linalg.norm(ps[i] @ ps[j]) > tol:
                    return False
        for s, k in zip(ens.states, self.assignment):
            if np.linalg.norm(np.kron(ps[k], np.eye(db)) @ s - s) > tol:
                return False
        return True

    def to_json(self) -> dict:
        return {"block_dims": self.block_dims, "assignment": list(self.assignment)}


def _complement(bases: list[np.ndarray], d: int) -> list[np.ndarray]:
    if bases:
        occupied = np.hstack(bases)
        p = np.eye(d) - occupied @ occupied.conj().T
    else:
        p = np.eye(d)
    w, v = np.linalg.eigh((p + p.conj().T) / 2)
    return [v[:, [j]] for j in range(d) if w[j] > 0.5]


def d_min(ens: DiscriminationEnsemble) -> tuple[int, SubspacePartition]:
    """Minimal max block dimension of an A-side orthogonal decomposition containing every state's support.

    Supports that overlap must share a block, so the transitive closure of
    the overlap relation is the unique finest valid partition.
    """
    da, db = ens.dims
    sups = [a_support(s, ens.dims) for s in ens.states]
    parent = list(range(len(sups)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(len(sups)):
        for j in range(i + 1, len(sups)):
            if overlaps(sups[i], sups[j]):
                parent[find(i)] = find(j)
    roots = list(dict.fromkeys(find(i) for i in range(len(sups))))
    bases = [_span([sups[i] for i in range(len(sups)) if find(i) == r]) for r in roots]
    assignment = tuple(roots.index(find(i)) for i in range(len(sups)))
    bases += _complement(bases, da)
    part = SubspacePartition(bases, assignment)
    return part.max_dim, part


def d_min_bruteforce(ens: DiscriminationEnsemble) -> int:
    """Exhaustive search over groupings of the distinct supports into mutually orthogonal blocks."""
    da, _ = ens.dims
    sups = []
    for s in ens.states:
        b = a_support(s, ens.dims)
        p = b @ b.conj().T
        if not any(np.linalg.norm(p - q @ q.conj().T) < 1e-9 for q in sups):
            sups.append(b)
    best = [da]

    def rec(i, groups):
        if i == len(sups):
            dims = [_span(g).shape[1] for g in groups]
            best[0] = min(best[0], max(dims + [1]))
            return
        s = sups[i]
        for gi in range(len(groups) + 1):
            others = [g for gj, g in enumerate(groups) if gj != gi]
            if any(overlaps(s, t) for g in others for t in g):
                continue
            new = [list(g) for g in groups]
            if gi == len(groups):
                new.append([s])
            else:
                new[gi].append(s)
            if _span(new[gi]).shape[1] >= best[0] and best[0] > 1:
                continue
            rec(i + 1, new)

    rec(0, [])
    return best[0]


# ---------------------------------------------------------------------------
# One-way protocol


def _weyl(u: int, v: int, d: int) -> np.ndarray:
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return np.linalg.matrix_power(shift, u) @ np.linalg.matrix_power(clock, v)


@dataclass
class OneWayRun:
    resource_rank: int
    success: list  # per-state probability of a correct identification
    error: list
    branches: int

    @property
    def min_success(self) -> float:
        return float(min(self.success))

    @property
    def zero_error(self) -> bool:
        return max(self.error) <= 1e-10 and self.min_success >= 1 - 1e-10

    def to_json(self) -> dict:
        return {
            "resource_rank": self.resource_rank,
            "min_success": self.min_success,
            "max_error": float(max(self.error)),
            "branches": self.branches,
        }


def one_way_protocol(ens: DiscriminationEnsemble, partition: SubspacePartition | None = None) -> OneWayRun:
    """Alice measures the blocks, teleports her block over a rank-``r`` resource, Bob measures jointly.

    ``r`` is the largest block dimension. Every branch is enumerated.
    """
    if partition is None:
        _, partition = d_min(ens)
    if not partition.validate(ens):
        raise ValueError("partition is invalid for this ensemble")
    da, db = ens.dims
    r = partition.max_dim
    phi = np.eye(r).reshape(-1) / np.sqrt(r)
    success, error, branches = [], [], 0
    # Bob's measurement vectors for block k live on B' (x) B.
    targets = {}
    for k, basis in enumerate(partition.bases):
        pad = np.zeros((r, da), dtype=complex)
        pad[: basis.shape[1]] = basis.conj().T
        targets[k] = {j: np.kron(pad, np.eye(db)) @ s for j, s in enumerate(ens.states) if partition.assignment[j] == k}
    for j, psi in enumerate(ens.states):
        ok = bad = 0.0
        for k, basis in enumerate(partition.bases):
            pad = np.zeros((r, da), dtype=complex)
            pad[: basis.shape[1]] = basis.conj().T
            post = (np.kron(pad, np.eye(db)) @ psi).reshape(r, db)
            pk = float(np.sum(np.abs(post) ** 2))
            if pk <= 1e-14:
                continue
            post /= np.sqrt(pk)
            # axes: A, B, A', B'
            full = np.einsum("ab,cd->abcd", post, phi.reshape(r, r))
            for u in range(r):
                for v in range(r):
                    w = _weyl(u, v, r)
                    bell = (np.kron(w, np.eye(r)) @ phi).reshape(r, r)
                    bob = np.einsum("ac,abcd->db", bell.conj(), full)  # B', B
                    p = float(np.sum(np.abs(bob) ** 2))
                    if p <= 1e-14:
                        continue
                    branches += 1
                    bob = (w @ bob).reshape(-1)
                    for jj, t in targets[k].items():
                        q = pk * abs(np.vdot(t, bob)) ** 2
                        if jj == j:
                            ok += q
                        else:
                            bad += q
        success.append(ok)
        error.append(bad)
    return OneWayRun(r, success, error, branches)


# ---------------------------------------------------------------------------
# V_d and the two-way protocol


def _swap_levels(d: int, i: int, j: int) -> np.ndarray:
    w = np.eye(d, dtype=complex)
    w[[i, j]] = w[[j, i]]
    return w


def v_d(d: int) -> np.ndarray:
    """``|0><0| (x) (|1> <-> |3>) + (|1><1| + |2><2|) (x) I`` on ``3 (x) (d+1)``, B levels ``|0>..|d>``."""
    if d < 3:
        raise FamilyError(f"V_d needs d >= 3, got {d}")
    p0 = np.diag([1, 0, 0]).astype(complex)
    return np.kron(p0, _swap_levels(d + 1, 1, 3)) + np.kron(np.eye(3) - p0, np.eye(d + 1))


def embed_b(ens: DiscriminationEnsemble, d_b: int) -> DiscriminationEnsemble:
    da, db0 = ens.dims
    iso = np.eye(d_b, db0)
    sts = tuple(np.kron(np.eye(da), iso) @ s for s in ens.states)
    return DiscriminationEnsemble(sts, (da, d_b), ens.name + "+", basis=False)


def primed_nine_states(d: int) -> DiscriminationEnsemble:
    ens = embed_b(nine_states(), d + 1)
    v = v_d(d)
    return DiscriminationEnsemble(tuple(v @ s for s in ens.states), ens.dims, "nine'", basis=False)


def generalized_v(d_a: int, d_b: int) -> np.ndarray:
    """Rank-2 unitary on ``d_A (x) (d_B+1)`` moving the ``|1>|2>`` component of the first pair to a fresh level."""
    p = np.zeros((d_a, d_a), dtype=complex)
    p[0, 0] = 1
    return np.kron(p, _swap_levels(d_b + 1, 1, d_b)) + np.kron(np.eye(d_a) - p, np.eye(d_b + 1))


def primed_generalized(d_a: int, d_b: int) -> DiscriminationEnsemble:
    ens = embed_b(generalized_basis(d_a, d_b), d_b + 1)
    v = generalized_v(d_a, d_b)
    return DiscriminationEnsemble(tuple(v @ s for s in ens.states), ens.dims, ens.name + "'", basis=False)


@dataclass
class Tile:
    a: frozenset
    b: frozenset
    members: tuple  # state indices

    @property
    def long(self) -> str | None:
        if len(self.a) > 1:
            return "A"
        if len(self.b) > 1:
            return "B"
        return None


def product_tiles(ens: DiscriminationEnsemble) -> list[Tile]:
    """Group product states by their computational supports on each side."""
    groups: dict = {}
    for j, s in enumerate(ens.states):
        m = s.reshape(ens.dims)
        u, sv, vh = np.linalg.svd(m)
        if sv.size > 1 and sv[1] > 1e-8:
            raise ValueError(f"state {j} is not a product state")
        a = frozenset(np.flatnonzero(np.abs(u[:, 0]) > 1e-9).tolist())
        b = frozenset(np.flatnonzero(np.abs(vh[0]) > 1e-9).tolist())
        groups.setdefault((a, b), []).append(j)
    tiles = [Tile(a, b, tuple(ms)) for (a, b), ms in groups.items()]
    for t in tiles:
        if len(t.a) > 1 and len(t.b) > 1:
            raise ValueError("tiles extended on both sides are not supported")
    return tiles


@dataclass
class TreeNode:
    party: str
    classes: list  # index sets; the last may be the idle remainder
    children: list


@dataclass
class TreeLeaf:
    party: str | None
    basis: np.ndarray | None  # columns on the measuring party's space
    labels: list  # state index per column, None for completion vectors
    members: tuple


def _finest_classes(tiles: list[Tile], party: str, dim: int) -> list[set]:
    parent = list(range(dim))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    touched = set()
    for t in tiles:
        idx = sorted(t.a if party == "A" else t.b)
        touched |= set(idx)
        for x in idx[1:]:
            parent[find(x)] = find(idx[0])
    classes: dict = {}
    for x in sorted(touched):
        classes.setdefault(find(x), set()).add(x)
    out = list(classes.values())
    rest = set(range(dim)) - touched
    if rest:
        out.append(rest)
    return out


def _leaf(tile: Tile, ens: DiscriminationEnsemble) -> TreeLeaf:
    party = tile.long
    if party is None:
        return TreeLeaf(None, None, [tile.members[0]], tile.members)
    da, db = ens.dims
    cols = []
    for j in tile.members:
        m = ens.states[j].reshape(da, db)
        u, _, vh = np.linalg.svd(m)
        cols.append(u[:, 0] if party == "A" else vh[0])
    cols = np.array(cols).T
    d = da if party == "A" else db
    q, _ = np.linalg.qr(np.hstack([cols, np.eye(d)]))
    extra = []
    for c in q.T:
        resid = c - cols @ (cols.conj().T @ c)
        for e in extra:
            resid -= e * np.vdot(e, resid)
        if np.linalg.norm(resid) > 1e-8 and len(extra) < d - cols.shape[1]:
            extra.append(resid / np.linalg.norm(resid))
    basis = np.hstack([cols] + [e[:, None] for e in extra]) if extra else cols
    labels = list(tile.members) + [None] * len(extra)
    return TreeLeaf(party, basis, labels, tile.members)


def design_tree(ens: DiscriminationEnsemble, first: str = "B", max_rounds: int = 64):
    """Adaptive tree of coarse computational measurements that never split an extended tile.

    At each node the next party (alternating, starting with ``first``)
    measures the finest partition of its levels compatible with the surviving
    tiles; a party whose partition would not separate anything passes.
    """
    dims = {"A": ens.dims[0], "B": ens.dims[1]}
    other = {"A": "B", "B": "A"}

    def build(tiles, party, depth):
        if len(tiles) == 1:
            return _leaf(tiles[0], ens)
        if depth > max_rounds:
            raise RuntimeError("measurement tree did not terminate")
        for p in (party, other[party]):
            classes = _finest_classes(tiles, p, dims[p])
            groups = [[t for t in tiles if (t.a if p == "A" else t.b) & c] for c in classes]
            if sum(1 for g in groups if g) > 1:
                children = [build(g, other[p], depth + 1) if g else TreeLeaf(None, None, [], ()) for g in groups]
                return TreeNode(p, [sorted(c) for c in classes], children)
        raise RuntimeError("no non-disturbing local measurement separates the surviving tiles")

    return build(product_tiles(ens), first, 0)


@dataclass
class TwoWayRun:
    success: list
    error: list
    rounds: list  # maximal rounds used per state
    paths: dict  # state index -> list of (party, outcome) along the most likely path
    completeness_defect: float

    @property
    def zero_error(self) -> bool:
        return max(self.error) <= 1e-10 and min(self.success) >= 1 - 1e-10

    def to_json(self) -> dict:
        return {
            "min_success": float(min(self.success)),
            "max_error": float(max(self.error)),
            "max_rounds": int(max(self.rounds)),
            "completeness_defect": self.completeness_defect,
        }


def _projector(idx, d: int) -> np.ndarray:
    p = np.zeros((d, d), dtype=complex)
    for i in idx:
        p[i, i] = 1
    return p


def run_tree(tree, ens: DiscriminationEnsemble) -> TwoWayRun:
    da, db = ens.dims
    defect = [0.0]

    def walk(node, m, prob, rounds, path, out):
        if isinstance(node, TreeLeaf):
            if node.party is None:
                label = node.labels[0] if node.labels else None
                out.append((label, prob, rounds, path))
                return
            b = node.basis
            defect[0] = max(defect[0], float(np.linalg.norm(b @ b.conj().T - np.eye(b.shape[0]))))
            amps = b.conj().T @ m if node.party == "A" else m @ b.conj()
            for c, label in enumerate(node.labels):
                q = float(np.sum(np.abs(amps[c] if node.party == "A" else amps[:, c]) ** 2))
                if q > 1e-14:
                    out.append((label, prob * q, rounds + 1, path + [(node.party, f"final:{c}")]))
            return
        d = da if node.party == "A" else db
        total = sum(_projector(c, d) for c in node.classes)
        defect[0] = max(defect[0], float(np.linalg.norm(total - np.eye(d))))
        for k, (c, child) in enumerate(zip(node.classes, node.children)):
            p = _projector(c, d)
            post = p @ m if node.party == "A" else m @ p.T
            q = float(np.sum(np.abs(post) ** 2))
            if q <= 1e-14:
                continue
            walk(child, post / np.sqrt(q), prob * q, rounds + 1, path + [(node.party, k)], out)

    success, error, rounds, paths = [], [], [], {}
    for j, s in enumerate(ens.states):
        out = []
        walk(tree, s.reshape(da, db), 1.0, 0, [], out)
        success.append(sum(p for lab, p, _, _ in out if lab == j))
        error.append(sum(p for lab, p, _, _ in out if lab != j))
        rounds.append(max(r for _, _, r, _ in out))
        paths[j] = max(out, key=lambda t: t[1])[3]
    return TwoWayRun(success, error, rounds, paths, defect[0])


def two_way_protocol(d: int) -> TwoWayRun:
    """Apply ``V_d`` then the adaptive tree to the primed nine states."""
    ens = primed_nine_states(d)
    return run_tree(design_tree(ens), ens)


# ---------------------------------------------------------------------------
# Rank-2 gadget realization with one EPR pair

TWO_NODE = NetworkGraph(("alice", "bob"), {"E": ("alice", "bob")}, ("alice", "bob"), ("alice", "bob"))


def predicate_controlled_circuit(d_a: int, d_b: int, control_level: int, w: np.ndarray) -> Circuit:
    """``|c><c| (x) W + (I - |c><c|) (x) I`` between Alice and Bob with one EPR pair.

    Alice copies the predicate ``[a == c]`` onto an ancilla qubit, teleports it,
    Bob applies controlled-``W``, measures the qubit in the X basis, and Alice
    undoes the phase on level ``c``.
    """
    c = Circuit()
    c.add_wire("A", "alice", d_a)
    c.add_wire("B", "bob", d_b)
    c.alloc("anc", "alice")
    c.epr("ea", "eb", "alice", "bob", "E")
    copy = np.eye(2 * d_a, dtype=complex)
    i0, i1 = 2 * control_level, 2 * control_level + 1
    copy[[i0, i1]] = copy[[i1, i0]]
    c.u(copy, ["A", "anc"], name="copy-predicate")
    c.extend(teleport_gadget("anc", "ea", "eb", ("t1", "t2")))
    c.u(w, "B", controls="eb", name="controlled-W")
    c.u(H, "eb")
    c.measure("eb", "x")
    phase = np.eye(d_a, dtype=complex)
    phase[control_level, control_level] = -1
    c.u(phase, "A", condition="x")
    c.outputs = ["A", "B"]
    return c


@dataclass
class GadgetReport:
    channel_error: float
    locc_valid: bool
    epr_pairs: int
    classical_bits: int
    operator_schmidt_rank: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _gadget_report(v: np.ndarray, d_a: int, d_b: int, circuit: Circuit) -> GadgetReport:
    chan, _ = circuit_channel(circuit)
    err = chan.distance(choi_of_unitary(v))
    tr = locc_validate(circuit, TWO_NODE)
    return GadgetReport(float(err), tr.valid, len(tr.epr_edges), tr.classical_bits, operator_schmidt_rank(v, (d_a, d_b)))


def v_d_gadget(d: int) -> GadgetReport:
    return _gadget_report(v_d(d), 3, d + 1, predicate_controlled_circuit(3, d + 1, 0, _swap_levels(d + 1, 1, 3)))


def generalized_gadget(d_a: int, d_b: int) -> GadgetReport:
    circ = predicate_controlled_circuit(d_a, d_b + 1, 0, _swap_levels(d_b + 1, 1, d_b))
    return _gadget_report(generalized_v(d_a, d_b), d_a, d_b + 1, circ)


# ---------------------------------------------------------------------------
# Gap report and Schmidt strength


def entanglement_gap_report(d_a: int = 3, d_b: int = 3, d: int = 4) -> dict:
    """One-way rank from ``d_min`` versus the rank-2 assisted two-way protocol, both simulated."""
    if (d_a, d_b) == (3, 3):
        ens = nine_states()
        primed = primed_nine_states(d)
        gadget = v_d_gadget(d)
        family = "nine"
    else:
        ens = generalized_basis(d_a, d_b)
        primed = primed_generalized(d_a, d_b)
        gadget = generalized_gadget(d_a, d_b)
        family = "generalized"
    value, part = d_min(ens)
    one = one_way_protocol(ens, part)
    two = run_tree(design_tree(primed), primed)
    return {
        "family": family,
        "d_A": d_a,
        "d_B": d_b,
        "one_way_rank": value,
        "two_way_rank": gadget.operator_schmidt_rank,
        "certificates": {
            "partition": part.to_json(),
            "one_way": one.to_json(),
            "one_way_zero_error": one.zero_error,
            "two_way": two.to_json(),
            "two_way_zero_error": two.zero_error,
            "gadget": gadget.to_json(),
        },
    }


def schmidt_strength_closed_form(d: int) -> tuple[float, float, float]:
    """``(lambda_0^2, lambda_1^2, H)`` of ``V_d``."""
    root = np.sqrt(9 * d * d - 14 * d + 9)
    l0 = (3 * (d + 1) - root) / (6 * (d + 1))
    l1 = (3 * (d + 1) + root) / (6 * (d + 1))
    h = -sum(x * np.log2(x) for x in (l0, l1) if x > 0)
    return float(l0), float(l1), float(h)


def schmidt_strength_numeric(d: int) -> tuple[float, float, float]:
    """Same quantities from the operator Schmidt decomposition of the explicit ``V_d``."""
    dec = operator_schmidt(v_d(d), (3, d + 1))
    c2 = sorted(float(c) ** 2 for c in dec.coefficients)[-2:]
    if len(c2) == 1:
        c2 = [0.0] + c2
    h = -sum(x * np.log2(x) for x in c2 if x > 0)
    return c2[0], c2[1], float(h)


def vd_gram(d: int) -> np.ndarray:
    """``V_d' V_d'^dag`` in the computational basis of Alice's two copies, restricted to the diagonal support."""
    v = v_d(d).reshape(3, d + 1, 3, d + 1)
    # V_d' = sum_ij <i|_B V_d |j>_A (x) |j>_A <i|_B  as a map B B -> A A
    vp = np.einsum("ajbi->abji", v).reshape(9, (d + 1) ** 2)
    g = vp @ vp.conj().T
    idx = [0, 4, 8]
    return g[np.ix_(idx, idx)]


__all__ = [
    "DiscriminationEnsemble",
    "FamilyError",
    "GadgetReport",
    "OneWayRun",
    "SubspacePartition",
    "TreeLeaf",
    "TreeNode",
    "TwoWayRun",
    "a_support",
    "computational_basis",
    "d_min",
    "d_min_bruteforce",
    "design_tree",
    "embed_b",
    "entanglement_gap_report",
    "generalized_basis",
    "generalized_gadget",
    "generalized_v",
    "nine_states",
    "one_way_protocol",
    "overlaps",
    "predicate_controlled_circuit",
    "primed_generalized",
    "primed_nine_states",
    "product_tiles",
    "run_tree",
    "schmidt_strength_closed_form",
    "schmidt_strength_numeric",
    "two_way_protocol",
    "v_d",
    "v_d_gadget",
    "vd_gram",
]
