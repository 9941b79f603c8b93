"""Classically controlled circuit IR, exhaustive branch simulator and LOCC validator.

Wire order for kets is the order wires appear (initial wires first, then
allocations); wire 0 is the most significant digit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .linalg import (
    MAX_DIM,
    DimensionError,
    H,
    X,
    Z,
    matrix_from_json,
    matrix_to_json,
)
from .ops import kraus_to_choi

Condition = Any  # bit name | 0/1 | ("xor"|"and", *terms) | ("not", term)


class CircuitError(ValueError):
    """Raised on malformed circuits (dead wires, reassigned bits)."""


def eval_condition(cond: Condition, bits: dict) -> int:
    if cond is None:
        return 1
    if isinstance(cond, (bool, int, np.integer)):
        return int(cond) & 1
    if isinstance(cond, str):
        if cond not in bits:
            raise CircuitError(f"condition references unknown bit {cond!r}")
        return int(bits[cond]) & 1
    op, *args = cond
    vals = [eval_condition(a, bits) for a in args]
    if op == "xor":
        return int(sum(vals) % 2)
    if op == "and":
        return int(all(vals))
    if op == "not":
        return 1 - vals[0]
    raise CircuitError(f"unknown condition operator {op!r}")


def condition_bits(cond: Condition) -> set[str]:
    if cond is None or isinstance(cond, (bool, int, np.integer)):
        return set()
    if isinstance(cond, str):
        return {cond}
    out: set[str] = set()
    for a in cond[1:]:
        out |= condition_bits(a)
    return out


def xor(*bits) -> Condition:
    bits = [b for b in bits if b is not None]
    if not bits:
        return 0
    return bits[0] if len(bits) == 1 else ("xor", *bits)


@dataclass
class Wire:
    label: str
    node: Any = None
    dim: int = 2


@dataclass
class Gate:
    kind: str
    targets: tuple
    controls: tuple = ()
    params: dict = field(default_factory=dict)
    condition: Condition = None


@dataclass
class Circuit:
    """Ordered gate list over named wires.

    Gate kinds: ``unitary``, ``measure``, ``alloc``, ``epr``, ``transfer``,
    ``discard``.
    """

    wires: list[Wire] = field(default_factory=list)
    gates: list[Gate] = field(default_factory=list)
    outputs: list[str] | None = None

    # construction helpers -------------------------------------------------
    def add_wire(self, label: str, node=None, dim: int = 2) -> str:
        if any(w.label == label for w in self.wires):
            raise CircuitError(f"duplicate wire {label!r}")
        self.wires.append(Wire(label, node, dim))
        return label

    def u(self, matrix, targets, controls=(), control_values=None, condition=None, name=None):
        targets = (targets,) if isinstance(targets, str) else tuple(targets)
        controls = (controls,) if isinstance(controls, str) else tuple(controls)
        params = {"matrix": np.asarray(matrix, dtype=complex)}
        if control_values is not None:
            params["control_values"] = tuple(control_values)
        if name:
            params["name"] = name
        self.gates.append(Gate("unitary", targets, controls, params, condition))
        return self

    def cnot(self, control: str, target: str, condition=None):
        return self.u(X, target, controls=control, condition=condition, name="cnot")

    def measure(self, target: str, bit: str | None, keep: bool = False):
        self.gates.append(Gate("measure", (target,), (), {"bit": bit, "keep": keep}))
        return self

    def alloc(self, label: str, node=None, dim: int = 2):
        self.gates.append(Gate("alloc", (label,), (), {"node": node, "dim": dim}))
        return self

    def epr(self, a: str, b: str, node_a, node_b, edge=None):
        self.gates.append(
            Gate("epr", (a, b), (), {"nodes": (node_a, node_b), "edge": edge})
        )
        return self

    def transfer(self, label: str, node, edge=None):
        self.gates.append(Gate("transfer", (label,), (), {"node": node, "edge": edge}))
        return self

    def discard(self, label: str):
        self.gates.append(Gate("discard", (label,), ()))
        return self

    def extend(self, other: "Circuit"):
        for w in other.wires:
            if not any(v.label == w.label for v in self.wires):
                self.wires.append(Wire(w.label, w.node, w.dim))
        self.gates.extend(other.gates)
        return self

    def input_dim(self) -> int:
        return int(np.prod([w.dim for w in self.wires])) if self.wires else 1

    def measured_bits(self) -> list[str]:
        return [g.params["bit"] for g in self.gates if g.kind == "measure" and g.params["bit"]]

    # JSON -----------------------------------------------------------------
    def to_json(self) -> dict:
        gates = []
        for g in self.gates:
            params = {}
            for k, v in g.params.items():
                if isinstance(v, np.ndarray):
                    params[k] = matrix_to_json(v)
                elif isinstance(v, tuple):
                    params[k] = list(v)
                else:
                    params[k] = v
            gates.append(
                {
                    "kind": g.kind,
                    "params": params,
                    "targets": list(g.targets),
                    "controls": list(g.controls),
                    "condition": _cond_json(g.condition),
                }
            )
        return {
            "wires": [{"label": w.label, "node": w.node, "dim": w.dim} for w in self.wires],
            "gates": gates,
            "outputs": self.outputs,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Circuit":
        c = cls()
        for w in obj["wires"]:
            c.add_wire(w["label"], w.get("node"), int(w.get("dim", 2)))
        for g in obj["gates"]:
            params = dict(g.get("params", {}))
            if "matrix" in params:
                params["matrix"] = matrix_from_json(params["matrix"])
            for k in ("control_values", "nodes"):
                if k in params and params[k] is not None:
                    params[k] = tuple(params[k])
            c.gates.append(
                Gate(
                    g["kind"],
                    tuple(g.get("targets", ())),
                    tuple(g.get("controls", ())),
                    params,
                    _cond_from_json(g.get("condition")),
                )
            )
        c.outputs = obj.get("outputs")
        return c


def _cond_json(c):
    if c is None or isinstance(c, (str, int)):
        return c
    return [c[0]] + [_cond_json(a) for a in c[1:]]


def _cond_from_json(c):
    if c is None or isinstance(c, (str, int)):
        return c
    return tuple([c[0]] + [_cond_from_json(a) for a in c[1:]])


# ---------------------------------------------------------------------------
# Simulation


@dataclass
class Branch:
    bits: dict
    probability: float
    state: np.ndarray  # tensor, axes = wires (+ trailing reference axis if any)
    wires: list[str]
    multiplicity: int = 1

    def vector(self, order: Sequence[str] | None = None) -> np.ndarray:
        """Normalised state with wire axes permuted into ``order``."""
        t = self.state
        if order is not None:
            perm = [self.wires.index(w) for w in order]
            rest = [i for i in range(len(self.wires)) if i not in perm]
            extra = list(range(len(self.wires), t.ndim))
            t = t.transpose(perm + rest + extra)
        v = t.reshape(-1)
        n = np.linalg.norm(v)
        return v / n if n > 0 else v


@dataclass
class SimulationTrace:
    branches: list[Branch]

    def total_probability(self) -> float:
        return float(sum(b.probability for b in self.branches))

    def to_json(self, include_states: bool = False) -> dict:
        out = []
        for b in self.branches:
            rec = {"bits": b.bits, "probability": b.probability, "multiplicity": b.multiplicity}
            if include_states:
                v = b.vector()
                rec["state"] = {"re": v.real.tolist(), "im": v.imag.tolist(), "wires": b.wires}
            out.append(rec)
        return {"branches": out}


def _apply(state: np.ndarray, wires: list[str], dims: dict, op: np.ndarray, on: Sequence[str]):
    axes = [wires.index(w) for w in on]
    t = np.moveaxis(state, axes, list(range(len(axes))))
    shp = t.shape
    d = int(np.prod([dims[w] for w in on]))
    t = (op @ t.reshape(d, -1)).reshape(shp)
    return np.moveaxis(t, list(range(len(axes))), axes)


def controlled_matrix(u: np.ndarray, control_dims: Sequence[int], control_values: Sequence[int]) -> np.ndarray:
    """Operator ``P_c (x) u + (I - P_c) (x) I`` with ``P_c`` projecting onto the control values."""
    dc = int(np.prod(control_dims)) if control_dims else 1
    dt = u.shape[0]
    idx = 0
    for v, d in zip(control_values, control_dims):
        idx = idx * d + v
    out = np.eye(dc * dt, dtype=complex)
    out[idx * dt : (idx + 1) * dt, idx * dt : (idx + 1) * dt] = u
    return out


def _last_uses(circuit: Circuit) -> dict[str, int]:
    last: dict[str, int] = {}
    for i, g in enumerate(circuit.gates):
        for b in condition_bits(g.condition):
            last[b] = i
    return last


def _canon_key(branch: Branch, live: Iterable[str]) -> tuple:
    v = branch.state.reshape(-1)
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) > 1e-6))
    v = v * (abs(v[k]) / v[k])
    r = np.round(v, 7) + 0.0
    return (
        tuple(branch.wires),
        tuple(sorted((b, branch.bits[b]) for b in live if b in branch.bits)),
        r.real.tobytes(),
        r.imag.tobytes(),
    )


def _merge(branches: list[Branch], live: set[str]) -> list[Branch]:
    groups: dict[tuple, Branch] = {}
    order = []
    for b in branches:
        key = _canon_key(b, live)
        if key in groups:
            g = groups[key]
            p = g.probability + b.probability
            v = g.state / np.sqrt(g.probability)
            g.state = v * np.sqrt(p)
            g.probability = p
            g.multiplicity += b.multiplicity
        else:
            nb = Branch({k: v for k, v in b.bits.items() if k in live}, b.probability, b.state, b.wires, b.multiplicity)
            groups[key] = nb
            order.append(key)
    return [groups[k] for k in order]


def simulate(
    circuit: Circuit,
    state=None,
    keep_bits: Iterable[str] = (),
    merge: bool = True,
    reference_dim: int | None = None,
    prune: float = 1e-14,
) -> SimulationTrace:
    """Exhaustive branch enumeration over measurement outcomes.

    ``state`` is a normalised vector on the initial wires, or, when
    ``reference_dim`` is given, a ``(dim, reference_dim)`` array whose second
    axis is an untouched reference system. With ``merge`` on, branches that
    agree on every still-needed bit and whose states coincide up to a global
    phase are combined.
    """
    dims = {w.label: w.dim for w in circuit.wires}
    wires = [w.label for w in circuit.wires]
    din = circuit.input_dim()
    if state is None:
        state = np.zeros(din, dtype=complex)
        state[0] = 1
    state = np.asarray(state, dtype=complex)
    shape = [dims[w] for w in wires]
    if reference_dim is not None:
        if state.shape != (din, reference_dim):
            raise DimensionError("state must be (input dim, reference dim)")
        shape = shape + [reference_dim]
        norm2 = float(np.sum(np.abs(state) ** 2))
    else:
        if state.size != din:
            raise DimensionError(f"input state has size {state.size}, circuit needs {din}")
        norm2 = float(np.sum(np.abs(state) ** 2))
        if abs(norm2 - 1) > 1e-10:
            raise ValueError("input state is not normalised")
    tensor = state.reshape(shape) if shape else state.reshape(())
    branches = [Branch({}, norm2, tensor, list(wires))]
    keep = set(keep_bits)
    last = _last_uses(circuit)
    assigned: set[str] = set()

    for gi, g in enumerate(circuit.gates):
        if g.kind == "measure" and g.params.get("bit"):
            if g.params["bit"] in assigned:
                raise CircuitError(f"classical bit {g.params['bit']!r} assigned twice")
            assigned.add(g.params["bit"])
        new = []
        for br in branches:
            new.extend(_step(g, gi, br, dims, prune))
        branches = new
        if merge:
            live = keep | {b for b, i in last.items() if i > gi}
            branches = _merge(branches, live)
    return SimulationTrace(branches)


def _step(g: Gate, gi: int, br: Branch, dims: dict, prune: float) -> list[Branch]:
    refs = list(g.targets) + list(g.controls)
    if g.kind not in ("alloc", "epr"):
        for w in refs:
            if w not in br.wires:
                raise CircuitError(f"gate {gi} ({g.kind}) references dead wire {w!r}")
    if g.kind == "unitary":
        if not eval_condition(g.condition, br.bits):
            return [br]
        m = np.asarray(g.params["matrix"], dtype=complex)
        dt = int(np.prod([dims[w] for w in g.targets]))
        if m.shape != (dt, dt):
            raise DimensionError(f"gate {gi} matrix shape {m.shape} does not fit targets")
        if g.controls:
            cd = [dims[w] for w in g.controls]
            cv = g.params.get("control_values") or tuple(d - 1 for d in cd)
            m = controlled_matrix(m, cd, cv)
        st = _apply(br.state, br.wires, dims, m, list(g.controls) + list(g.targets))
        return [Branch(br.bits, br.probability, st, br.wires, br.multiplicity)]
    if g.kind in ("alloc", "epr"):
        new_w = list(g.targets)
        for w in new_w:
            if w in br.wires:
                raise CircuitError(f"gate {gi} allocates live wire {w!r}")
        if g.kind == "alloc":
            d = int(g.params.get("dim", 2))
            dims[new_w[0]] = d
            add = np.zeros(d, dtype=complex)
            add[0] = 1
        else:
            dims[new_w[0]] = dims[new_w[1]] = 2
            add = np.array([[1, 0], [0, 1]], dtype=complex) / np.sqrt(2)
        nref = br.state.ndim - len(br.wires)
        st = np.tensordot(br.state, add, axes=0)
        # move the new axes in front of any reference axis
        if nref:
            nw = len(br.wires)
            k = add.ndim
            perm = list(range(nw)) + list(range(nw + nref, nw + nref + k)) + list(range(nw, nw + nref))
            st = st.transpose(perm)
        wires = br.wires + new_w
        total = int(np.prod([dims[w] for w in wires]))
        if total > MAX_DIM:
            raise DimensionError(f"live dimension {total} exceeds {MAX_DIM}")
        return [Branch(br.bits, br.probability, st, wires, br.multiplicity)]
    if g.kind == "transfer":
        return [br]
    if g.kind in ("measure", "discard"):
        w = g.targets[0]
        ax = br.wires.index(w)
        keep = g.kind == "measure" and g.params.get("keep", False)
        bit = g.params.get("bit") if g.kind == "measure" else None
        out = []
        for k in range(dims[w]):
            sl = np.take(br.state, k, axis=ax)
            p = float(np.sum(np.abs(sl) ** 2))
            if p <= prune * max(1.0, br.probability):
                continue
            bits = dict(br.bits)
            if bit:
                bits[bit] = k
            if keep:
                e = np.zeros(dims[w], dtype=complex)
                e[k] = 1
                st = np.moveaxis(np.tensordot(sl, e, axes=0), -1, ax)
                out.append(Branch(bits, p, st, br.wires, br.multiplicity))
            else:
                wires = [x for x in br.wires if x != w]
                out.append(Branch(bits, p, sl, wires, br.multiplicity))
        return out
    raise CircuitError(f"unknown gate kind {g.kind!r}")


def branch_kraus(trace: SimulationTrace, outputs: Sequence[str]) -> list[np.ndarray]:
    """Kraus operators of each branch when the input was a reference-entangled identity.

    Leftover live wires outside ``outputs`` are traced out.
    """
    ks = []
    for b in trace.branches:
        order = list(outputs) + [w for w in b.wires if w not in outputs]
        perm = [b.wires.index(w) for w in order] + [b.state.ndim - 1]
        t = b.state.transpose(perm)
        dout = int(np.prod(t.shape[: len(outputs)]))
        din = t.shape[-1]
        t = t.reshape(dout, -1, din)
        for j in range(t.shape[1]):
            ks.append(t[:, j, :])
    return ks


def circuit_channel(circuit: Circuit, outputs: Sequence[str] | None = None, merge: bool = True):
    """CJ operator of the circuit from its initial wires to ``outputs``, plus the trace."""
    outputs = list(outputs or circuit.outputs or [])
    din = circuit.input_dim()
    trace = simulate(circuit, np.eye(din, dtype=complex), reference_dim=din, merge=merge)
    ks = branch_kraus(trace, outputs)
    return kraus_to_choi(ks, din), trace


def deferred(circuit: Circuit) -> Circuit:
    """Replace measurements and classical conditions by coherent controls.

    Measured wires stay coherent and are discarded at the end; a gate
    conditioned on ``c(bits)`` becomes ``sum_b |b><b| (x) (U if c(b) else I)``.
    """
    out = Circuit([Wire(w.label, w.node, w.dim) for w in circuit.wires], [], circuit.outputs)
    bit_wire: dict[str, str] = {}
    measured: list[str] = []
    for g in circuit.gates:
        if g.kind == "measure":
            if g.params.get("keep"):
                raise CircuitError("deferral does not support measurements that keep the wire")
            if g.params.get("bit"):
                bit_wire[g.params["bit"]] = g.targets[0]
            measured.append(g.targets[0])
            continue
        if g.kind == "discard":
            measured.append(g.targets[0])
            continue
        if any(t in measured for t in list(g.targets) + list(g.controls)):
            raise CircuitError("a measured wire is reused; cannot defer")
        if g.kind == "unitary" and g.condition is not None:
            bits = sorted(condition_bits(g.condition))
            cw = [bit_wire[b] for b in bits]
            m = np.asarray(g.params["matrix"], dtype=complex)
            dims_t = m.shape[0]
            if g.controls:
                cd = [2] * len(g.controls)
                cv = g.params.get("control_values") or tuple(1 for _ in cd)
                m = controlled_matrix(m, cd, cv)
                dims_t = m.shape[0]
            big = np.zeros((2 ** len(bits) * dims_t,) * 2, dtype=complex)
            for vals in itertools.product((0, 1), repeat=len(bits)):
                idx = int("".join(map(str, vals)), 2) if vals else 0
                on = eval_condition(g.condition, dict(zip(bits, vals)))
                big[idx * dims_t : (idx + 1) * dims_t, idx * dims_t : (idx + 1) * dims_t] = (
                    m if on else np.eye(dims_t)
                )
            out.gates.append(
                Gate("unitary", tuple(cw) + tuple(g.controls) + tuple(g.targets), (), {"matrix": big})
            )
            continue
        out.gates.append(Gate(g.kind, g.targets, g.controls, dict(g.params), g.condition))
    for w in measured:
        out.gates.append(Gate("discard", (w,), ()))
    return out


# ---------------------------------------------------------------------------
# Gadgets


def teleport_gadget(sender: str, epr_a: str, epr_b: str, bits: tuple[str, str] | None = None) -> Circuit:
    """Teleport ``sender`` onto ``epr_b``; ``epr_a``/``epr_b`` must hold ``|Phi+>``."""
    m1, m2 = bits or (f"{sender}.m1", f"{sender}.m2")
    c = Circuit()
    c.cnot(sender, epr_a)
    c.u(H, sender)
    c.measure(sender, m1)
    c.measure(epr_a, m2)
    c.u(X, epr_b, condition=m2)
    c.u(Z, epr_b, condition=m1)
    return c


def gamma_d2(w1: str, w2: str, bit: str | None = None) -> Circuit:
    """Disentangle ``w1`` from ``sum_z a_z |z>|z>``, leaving ``sum_z a_z |z>`` on ``w2``."""
    bit = bit or f"{w1}.d2"
    c = Circuit()
    c.u(H, w1)
    c.measure(w1, bit)
    c.u(Z, w2, condition=bit)
    return c


def gamma_d3(w1: str, w2: str, w3: str, bit: str | None = None) -> Circuit:
    """Disentangle ``w3`` from ``sum l_xy |x>|y>|x+y>``."""
    bit = bit or f"{w3}.d3"
    c = Circuit()
    c.u(H, w3)
    c.measure(w3, bit)
    c.u(Z, w1, condition=bit)
    c.u(Z, w2, condition=bit)
    return c


def eisert_controlled_u(
    control: str,
    target: str,
    epr_a: str,
    epr_b: str,
    u,
    node_control=None,
    node_target=None,
    edge=None,
    tag: str | None = None,
) -> Circuit:
    """Controlled-``u`` across two nodes with one EPR pair (three classical bits).

    The control is copied onto a local ancilla, the ancilla is teleported,
    used as control at the target node, then measured in the X basis with a
    phase correction back on the control.
    """
    tag = tag or f"{control}>{target}"
    anc = f"{tag}.anc"
    c = Circuit()
    c.alloc(anc, node_control)
    c.epr(epr_a, epr_b, node_control, node_target, edge)
    c.cnot(control, anc)
    c.extend(teleport_gadget(anc, epr_a, epr_b, (f"{tag}.t1", f"{tag}.t2")))
    c.u(u, target, controls=epr_b)
    c.u(H, epr_b)
    c.measure(epr_b, f"{tag}.x")
    c.u(Z, control, condition=f"{tag}.x")
    return c


def fully_controlled_matrix(us: dict, n_controls: int) -> np.ndarray:
    """``sum_a |a><a| (x) u^(a)`` over qubit controls; keys are control tuples, missing keys are the identity."""
    d = next(iter(us.values())).shape[0] if us else 2
    total = 2**n_controls * d
    m = np.zeros((total, total), dtype=complex)
    for vals in itertools.product((0, 1), repeat=n_controls):
        key = vals if n_controls > 1 else vals[0]
        u = us.get(key, us.get(vals, np.eye(d)))
        idx = int("".join(map(str, vals)), 2)
        m[idx * d : (idx + 1) * d, idx * d : (idx + 1) * d] = u
    return m


class CatChain:
    """Fan-out copies of a control qubit across neighbouring nodes.

    ``extend`` copies the value at the current end of the chain to the next
    node through a fresh EPR pair; ``close`` measures every copy in the X
    basis and applies ``Z`` on the original conditioned on the parity.
    """

    def __init__(self, circuit: Circuit, control: str, node, tag: str):
        self.c = circuit
        self.control = control
        self.copies: dict = {node: control}
        self.tag = tag
        self.n = 0

    def extend(self, from_node, to_node, edge) -> str:
        src = self.copies[from_node]
        self.n += 1
        a, b = f"{self.tag}.e{self.n}a", f"{self.tag}.e{self.n}b"
        bit = f"{self.tag}.c{self.n}"
        self.c.epr(a, b, from_node, to_node, edge)
        self.c.cnot(src, a)
        self.c.measure(a, bit)
        self.c.u(X, b, condition=bit)
        self.copies[to_node] = b
        return b

    def close(self) -> None:
        bits = []
        for node, w in list(self.copies.items()):
            if w == self.control:
                continue
            self.n += 1
            bit = f"{self.tag}.x{self.n}"
            self.c.u(H, w)
            self.c.measure(w, bit)
            bits.append(bit)
        if bits:
            self.c.u(Z, self.control, condition=xor(*bits))
        self.copies = {k: v for k, v in self.copies.items() if v == self.control}


def fully_controlled_3q(
    l: str,
    m: str,
    n: str,
    us: dict,
    nodes: dict,
    chain_l: Sequence[tuple] = (),
    chain_m: Sequence[tuple] = (),
    tag: str = "fc",
) -> Circuit:
    """Distributed ``C_{l,m;n} = sum_ab |ab><ab| (x) u^(ab)``.

    ``nodes`` maps the three wires to their nodes. ``chain_l`` lists the
    hops ``(from_node, to_node, edge)`` carrying a copy of ``l`` to ``n``'s
    node, and likewise ``chain_m``.
    """
    c = Circuit()
    cl = CatChain(c, l, nodes[l], f"{tag}.l")
    cm = CatChain(c, m, nodes[m], f"{tag}.m")
    for hop in chain_l:
        cl.extend(*hop)
    for hop in chain_m:
        cm.extend(*hop)
    tn = nodes[n]
    c.u(fully_controlled_matrix(us, 2), [cl.copies[tn], cm.copies[tn], n])
    cl.close()
    cm.close()
    return c


# ---------------------------------------------------------------------------
# LOCC validation


@dataclass
class LoccTranscript:
    valid: bool
    events: list[dict]
    messages: list[dict]
    violations: list[dict]
    epr_edges: list
    transfer_edges: list

    @property
    def classical_bits(self) -> int:
        return len(self.messages)

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "classical_bits": self.classical_bits,
            "messages": self.messages,
            "violations": self.violations,
            "epr_edges": [list(e) if isinstance(e, tuple) else e for e in self.epr_edges],
            "transfer_edges": [list(e) if isinstance(e, tuple) else e for e in self.transfer_edges],
        }


def locc_validate(circuit: Circuit, network, start_gate: int = 0, end_gate: int | None = None) -> LoccTranscript:
    """Check that quantum gates stay inside nodes and cross-node links use network edges.

    ``network`` must provide ``nodes`` (ids) and ``edge_between(a, b)``
    returning an edge id or ``None``. Each edge carries at most one EPR pair
    or one transferred qubit. Classical messages are counted once per
    ``(bit, receiving node)``; only those arising in gates
    ``[start_gate, end_gate)`` are reported.
    """
    node_of = {w.label: w.node for w in circuit.wires}
    bit_node: dict[str, Any] = {}
    used_edges: set = set()
    events, messages, violations = [], [], []
    epr_edges, transfer_edges = [], []
    sent: set = set()
    valid_nodes = set(network.nodes)
    for w in circuit.wires:
        if w.node not in valid_nodes:
            violations.append({"gate": None, "reason": f"wire {w.label!r} at unknown node {w.node!r}"})
    end_gate = len(circuit.gates) if end_gate is None else end_gate

    def use_edge(gi, a, b, edge, kind):
        e = network.edge_between(a, b)
        if e is None:
            violations.append({"gate": gi, "reason": f"{kind} between {a!r} and {b!r} has no edge"})
            return None
        if edge is not None and edge != e:
            violations.append({"gate": gi, "reason": f"{kind} declares edge {edge!r} but nodes span {e!r}"})
        if e in used_edges:
            violations.append({"gate": gi, "reason": f"edge {e!r} used twice"})
        used_edges.add(e)
        return e

    for gi, g in enumerate(circuit.gates):
        if g.kind == "alloc":
            node_of[g.targets[0]] = g.params.get("node")
            if g.params.get("node") not in valid_nodes:
                violations.append({"gate": gi, "reason": f"alloc at unknown node {g.params.get('node')!r}"})
            continue
        if g.kind == "epr":
            a, b = g.params["nodes"]
            node_of[g.targets[0]], node_of[g.targets[1]] = a, b
            if a != b:
                e = use_edge(gi, a, b, g.params.get("edge"), "EPR pair")
                epr_edges.append(e)
            events.append({"gate": gi, "node": (a, b), "op": "epr"})
            continue
        if g.kind == "transfer":
            w = g.targets[0]
            a, b = node_of[w], g.params["node"]
            e = use_edge(gi, a, b, g.params.get("edge"), "qubit transfer")
            transfer_edges.append(e)
            node_of[w] = b
            events.append({"gate": gi, "node": (a, b), "op": "transfer"})
            continue
        involved = list(g.targets) + list(g.controls)
        ns = {node_of.get(w) for w in involved}
        if len(ns) != 1:
            violations.append(
                {"gate": gi, "reason": f"{g.kind} spans nodes {sorted(map(str, ns))}"}
            )
            continue
        node = ns.pop()
        for b in sorted(condition_bits(g.condition)):
            src = bit_node.get(b)
            if src is None:
                violations.append({"gate": gi, "reason": f"bit {b!r} used before it is produced"})
            elif src != node and (b, node) not in sent:
                sent.add((b, node))
                if start_gate <= gi < end_gate:
                    messages.append({"bit": b, "from": src, "to": node, "gate": gi})
        if g.kind == "measure" and g.params.get("bit"):
            bit_node[g.params["bit"]] = node
        events.append({"gate": gi, "node": node, "op": g.params.get("name", g.kind)})
    return LoccTranscript(not violations, events, messages, violations, epr_edges, transfer_edges)
