"""Butterfly, grail and Kobayashi protocols."""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.optimize

from ..circuit import Circuit, gamma_d2, gamma_d3, teleport_gadget
from ..decomp import kraus_cirac
from ..linalg import CNOT, H, I2, SWAP, X, Y, Z, as_matrix, is_unitary
from .conversion import CGate, convert_network, realize_converted
from .graphs import build_named


def u_global(x: float, y: float, z: float) -> np.ndarray:
    """``exp(i(x XX + y YY + z ZZ))`` by Hermitian eigendecomposition."""
    h = x * np.kron(X, X) + y * np.kron(Y, Y) + z * np.kron(Z, Z)
    w, v = np.linalg.eigh(h)
    return v @ np.diag(np.exp(1j * w)) @ v.conj().T


def _w_pair(y: float, z: float):
    plus = np.diag([np.exp(1j * (z - y)), -1j * np.exp(1j * (z + y))])
    minus = np.diag([np.exp(-1j * (z - y)), -1j * np.exp(-1j * (z + y))])
    return plus, minus


def u_x(x: float) -> np.ndarray:
    return H @ np.diag([np.exp(1j * x), -1j * np.exp(-1j * x)])


def butterfly_unitary_protocol(x: float, y: float, z: float) -> Circuit:
    """LOCC circuit over the butterfly implementing ``U_global(x, y, z)`` on qubits 1 and 3.

    Qubit 2 starts in ``|0>`` at ``n1``. The first fully controlled gate runs
    on the input column, the parameterised one on the output column, then
    qubit 2 is measured at ``n2`` and ``X`` corrections are applied at
    ``o1`` and ``o2`` on outcome 0.
    """
    g = build_named("butterfly")
    # The layout realizes U_global(-x, -y, z) up to X (x) X; fold both in.
    wp, wm = _w_pair(-y, z)
    first = CGate((1, 3), 2, {(0, 0): I2, (1, 1): I2, (0, 1): Z, (1, 0): Z})
    second = CGate((1, 3), 2, {(0, 0): wp, (1, 1): wp, (0, 1): wm, (1, 0): wm})
    spec = convert_network((3, 2), [first, second])
    pre = {(1, 1): H, (2, 1): H, (3, 1): H}
    post = {(1, 1): H, (3, 1): H, (2, 1): X @ H, (2, 2): u_x(-x)}
    c = realize_converted(spec, g, pre=pre, post=post, fixed_inputs={2: "0"})
    q1, q2, q3 = c.outputs
    c.measure(q2, "k")
    c.u(X, q1, condition=("not", "k"))
    c.u(X, q3, condition=("not", "k"))
    c.outputs = [q1, q3]
    return c


def _ry(t: float) -> np.ndarray:
    return scipy.linalg.expm(-1j * t / 2 * Y)


def _rz(t: float) -> np.ndarray:
    return np.diag([np.exp(-1j * t / 2), np.exp(1j * t / 2)])


CNOT21 = SWAP @ CNOT @ SWAP


def three_cnot_core(a: float, b: float, c: float) -> np.ndarray:
    return CNOT21 @ np.kron(_rz(a), _ry(b)) @ CNOT @ np.kron(I2, _ry(c)) @ CNOT21


def three_cnot_angles(x: float, y: float, z: float) -> tuple[float, float, float]:
    """Angles whose core has canonical parameters ``(x, y, z)``."""
    return (np.pi / 2 - 2 * z, 2 * x - np.pi / 2, np.pi / 2 - 2 * y)


def three_cnot_decomposition(u, tol: float = 1e-8) -> dict:
    """``U = e^{i phase} (A1 (x) B1) core(a, b, c) (A2 (x) B2)``."""
    u = as_matrix(u, 4, 4)
    if not is_unitary(u):
        raise ValueError("three_cnot_decomposition needs a unitary")
    kc = kraus_cirac(u)
    target = np.array(kc.params)
    angles = np.array(three_cnot_angles(*kc.params))
    kc_core = kraus_cirac(three_cnot_core(*angles))
    if np.linalg.norm(np.array(kc_core.params) - target) > 1e-9:
        res = scipy.optimize.least_squares(
            lambda t: np.array(kraus_cirac(three_cnot_core(*t)).params) - target, angles, xtol=1e-15, ftol=1e-15
        )
        angles = res.x
        kc_core = kraus_cirac(three_cnot_core(*angles))
    # U ~ K1 N K2, core ~ L1 N L2  =>  U ~ (K1 L1^dag) core (L2^dag K2)
    a1 = kc.u @ kc_core.u.conj().T
    b1 = kc.u_prime @ kc_core.u_prime.conj().T
    a2 = kc_core.w.conj().T @ kc.w
    b2 = kc_core.w_prime.conj().T @ kc.w_prime
    recon = np.kron(a1, b1) @ three_cnot_core(*angles) @ np.kron(a2, b2)
    ph = np.vdot(recon, u)
    ph = ph / abs(ph)
    err = float(np.linalg.norm(u - ph * recon))
    if err > tol:
        raise RuntimeError(f"three-CNOT reconstruction error {err:.2e}")
    return {"angles": tuple(float(t) for t in angles), "left": (a1, b1), "right": (a2, b2), "phase": float(np.angle(ph)), "error": err}


def grail_unitary_protocol(u) -> Circuit:
    """LOCC circuit over the grail network implementing any two-qubit ``U``.

    Input 1 is teleported ``i1 -> n1`` over ``E1``, the three-CNOT form runs
    on the embedded ``(2,3)``-cluster, and output 2 is teleported
    ``n4 -> o2`` over ``E2``.
    """
    dec = three_cnot_decomposition(u)
    a, b, c_ang = dec["angles"]
    a1, b1 = dec["left"]
    a2, b2 = dec["right"]
    g = build_named("grail")
    c = Circuit()
    c.add_wire("in1", "i1")
    c.add_wire("in2", "i2")
    c.epr("g1a", "g1b", "i1", "n1", "E1")
    c.extend(teleport_gadget("in1", "g1a", "g1b", ("g1.m1", "g1.m2")))
    cols = [CGate((2,), 1, {1: X}), CGate((1,), 2, {1: X}), CGate((2,), 1, {1: X})]
    spec = convert_network((2, 3), cols)
    pre = {(1, 1): a2, (2, 1): b2}
    post = {(2, 1): _ry(c_ang), (1, 2): _rz(a), (2, 2): _ry(b), (1, 3): a1, (2, 3): b1}
    realize_converted(spec, g, pre=pre, post=post, circuit=c, row_wires={1: "g1b", 2: "in2"})
    r1, r2 = c.outputs
    c.epr("g2a", "g2b", "n4", "o2", "E2")
    c.extend(teleport_gadget(r2, "g2a", "g2b", ("g2.m1", "g2.m2")))
    c.outputs = [r1, "g2b"]
    return c


KOBAYASHI_ORDER = ["A", "E1", "E2", "B", "E3", "E4", "E5", "E6", "E7", "Abar", "Bbar"]


def kobayashi_encoding() -> Circuit:
    """Encoding stage: fan-out CNOTs and one-qubit sends along the seven edges."""
    c = Circuit()
    c.add_wire("A", "i1")
    c.add_wire("B", "i2")
    for w, n in (("E1", "i1"), ("E2", "i1"), ("E3", "i2"), ("E4", "i2")):
        c.alloc(w, n)
    c.cnot("A", "E1").cnot("A", "E2").cnot("B", "E3").cnot("B", "E4")
    c.transfer("E1", "o1", "E1").transfer("E2", "n1", "E2")
    c.transfer("E3", "o2", "E3").transfer("E4", "n1", "E4")
    c.alloc("E5", "n1")
    c.cnot("E2", "E5").cnot("E4", "E5")
    c.transfer("E5", "n2", "E5")
    c.alloc("E6", "n2").alloc("E7", "n2")
    c.cnot("E5", "E6").cnot("E5", "E7")
    c.transfer("E6", "o1", "E6").transfer("E7", "o2", "E7")
    c.alloc("Abar", "o2").cnot("E3", "Abar").cnot("E7", "Abar")
    c.alloc("Bbar", "o1").cnot("E1", "Bbar").cnot("E6", "Bbar")
    return c


def kobayashi_butterfly() -> Circuit:
    """Two-pair quantum communication over the butterfly: ``A -> Abar`` at ``o2``, ``B -> Bbar`` at ``o1``."""
    c = kobayashi_encoding()
    c.outputs = None
    for w1, w2 in (("A", "E1"), ("B", "E3"), ("E2", "E1"), ("E4", "E3"), ("E5", "E6")):
        c.extend(gamma_d2(w1, w2))
    c.extend(gamma_d3("E1", "Bbar", "E6"))
    c.extend(gamma_d3("Abar", "E3", "E7"))
    c.extend(gamma_d2("E1", "Abar"))
    c.extend(gamma_d2("E3", "Bbar"))
    c.outputs = ["Abar", "Bbar"]
    return c


def kobayashi_target_state(lam) -> np.ndarray:
    """``sum lam_xy |x,x,x,y,y,y,x^y,x^y,x^y,x,y>`` in ``KOBAYASHI_ORDER``."""
    lam = np.asarray(lam, dtype=complex).reshape(2, 2)
    out = np.zeros(2**11, dtype=complex)
    for x in (0, 1):
        for y in (0, 1):
            s = x ^ y
            bits = [x, x, x, y, y, y, s, s, s, x, y]
            out[int("".join(map(str, bits)), 2)] += lam[x, y]
    return out
