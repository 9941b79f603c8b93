import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qnet.circuit import (
    Circuit,
    CircuitError,
    circuit_channel,
    controlled_matrix,
    deferred,
    eisert_controlled_u,
    eval_condition,
    fully_controlled_3q,
    fully_controlled_matrix,
    gamma_d2,
    gamma_d3,
    locc_validate,
    simulate,
    teleport_gadget,
    xor,
)
from qnet.linalg import CNOT, H, I2, X, Z, ket, random_state, random_unitary
from qnet.netcode import NetworkGraph, build_named, butterfly_unitary_protocol
from qnet.ops import choi_of_unitary

PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
seeds = st.integers(0, 2**32 - 1)
LINE = NetworkGraph(("L", "N", "M"), {"e1": ("L", "N"), "e2": ("N", "M")}, ("L",), ("M",))
PAIR = NetworkGraph(("a", "b"), {"e": ("a", "b")}, ("a",), ("b",))


def fidelity(a, b):
    return abs(np.vdot(a, b)) ** 2


def teleport_circuit():
    c = Circuit()
    c.add_wire("s", "a")
    c.epr("ea", "eb", "a", "b", "e")
    c.extend(teleport_gadget("s", "ea", "eb"))
    c.outputs = ["eb"]
    return c


def eisert_circuit(u):
    c = Circuit()
    c.add_wire("c", "a")
    c.add_wire("t", "b")
    c.extend(eisert_controlled_u("c", "t", "ea", "eb", u, "a", "b", "e"))
    c.outputs = ["c", "t"]
    return c


def fc3_circuit(us):
    c = Circuit()
    c.add_wire("l", "L")
    c.add_wire("m", "M")
    c.add_wire("n", "N")
    nodes = {"l": "L", "m": "M", "n": "N"}
    c.extend(fully_controlled_3q("l", "m", "n", us, nodes, [("L", "N", "e1")], [("M", "N", "e2")]))
    c.outputs = ["l", "m", "n"]
    return c


def random_us(r):
    return {ab: random_unitary(2, r) for ab in [(0, 0), (0, 1), (1, 0), (1, 1)]}


class TestSimulate:
    def test_empty_circuit(self):
        c = Circuit()
        c.add_wire("q")
        tr = simulate(c, PLUS)
        assert len(tr.branches) == 1
        assert abs(tr.branches[0].probability - 1) < 1e-15
        assert_allclose(tr.branches[0].vector(), PLUS)

    def test_measure_plus(self):
        c = Circuit()
        c.add_wire("q")
        c.measure("q", "m")
        tr = simulate(c, PLUS, keep_bits=["m"])
        assert sorted(b.bits["m"] for b in tr.branches) == [0, 1]
        assert_allclose([b.probability for b in tr.branches], [0.5, 0.5])

    def test_keep_measured_wire(self):
        c = Circuit()
        c.add_wire("q")
        c.measure("q", "m", keep=True)
        tr = simulate(c, PLUS, keep_bits=["m"])
        for b in tr.branches:
            assert_allclose(b.vector(), ket(b.bits["m"], 2))

    def test_teleportation_all_branches(self):
        r = np.random.default_rng(2)
        phi = random_state(2, r)
        tr = simulate(teleport_circuit(), phi, merge=False)
        assert len(tr.branches) == 4
        for b in tr.branches:
            assert b.wires == ["eb"]
            assert abs(fidelity(phi, b.vector()) - 1) < 1e-12

    @pytest.mark.parametrize("psi", [ket(0, 2), PLUS])
    def test_teleport_basic(self, psi):
        for b in simulate(teleport_circuit(), psi, merge=False).branches:
            assert abs(fidelity(psi, b.vector()) - 1) < 1e-12

    def test_teleport_half_of_entangled_pair(self):
        r = np.random.default_rng(4)
        c = Circuit()
        c.add_wire("ref", "a")
        c.add_wire("s", "a")
        c.epr("ea", "eb", "a", "b", "e")
        c.extend(teleport_gadget("s", "ea", "eb"))
        psi = random_state(4, r)
        for b in simulate(c, psi, merge=False).branches:
            assert abs(fidelity(psi, b.vector(["ref", "eb"])) - 1) < 1e-12

    def test_bit_assigned_twice(self):
        c = Circuit()
        c.add_wire("a")
        c.add_wire("b")
        c.measure("a", "m").measure("b", "m")
        with pytest.raises(CircuitError):
            simulate(c, np.array([1, 0, 0, 0]))

    def test_dead_wire(self):
        c = Circuit()
        c.add_wire("a")
        c.measure("a", "m").u(X, "a")
        with pytest.raises(CircuitError):
            simulate(c, ket(0, 2))

    def test_unnormalised_input(self):
        c = Circuit()
        c.add_wire("a")
        with pytest.raises(ValueError):
            simulate(c, np.array([1, 1]))

    def test_merge_preserves_channel(self):
        c = teleport_circuit()
        merged, _ = circuit_channel(c, merge=True)
        plain, _ = circuit_channel(c, merge=False)
        assert merged.distance(plain) < 1e-12
        assert merged.distance(choi_of_unitary(I2)) < 1e-12


class TestConditions:
    def test_eval(self):
        bits = {"a": 1, "b": 0}
        assert eval_condition("a", bits) == 1
        assert eval_condition(xor("a", "b"), bits) == 1
        assert eval_condition(("not", "a"), bits) == 0
        assert eval_condition(("and", "a", "b"), bits) == 0
        assert eval_condition(None, bits) == 1

    def test_controlled_matrix(self):
        assert_allclose(controlled_matrix(X, [2], [1]), CNOT)
        assert_allclose(controlled_matrix(X, [2], [0])[:2, :2], X)


class TestGammaGadgets:
    def _d2(self, alpha):
        c = Circuit()
        c.add_wire("w1")
        c.add_wire("w2")
        c.extend(gamma_d2("w1", "w2"))
        state = alpha[0] * ket("00") + alpha[1] * ket("11")
        return simulate(c, state, merge=False)

    def test_d2_basis(self):
        for b in self._d2([1, 0]).branches:
            assert abs(fidelity(ket(0, 2), b.vector()) - 1) < 1e-12

    def test_d2_plus_both_branches(self):
        tr = self._d2([1 / np.sqrt(2), 1 / np.sqrt(2)])
        assert len(tr.branches) == 2
        for b in tr.branches:
            assert abs(fidelity(PLUS, b.vector()) - 1) < 1e-12

    def test_d2_random(self):
        r = np.random.default_rng(8)
        for _ in range(50):
            a = random_state(2, r)
            for b in self._d2(a).branches:
                assert abs(fidelity(a, b.vector()) - 1) < 1e-10

    def _d3(self, lam):
        lam = np.asarray(lam, dtype=complex).reshape(2, 2)
        c = Circuit()
        for w in ("w1", "w2", "w3"):
            c.add_wire(w)
        c.extend(gamma_d3("w1", "w2", "w3"))
        state = sum(lam[x, y] * ket(f"{x}{y}{x ^ y}") for x in (0, 1) for y in (0, 1))
        return simulate(c, state, merge=False)

    @pytest.mark.parametrize(
        "lam, target",
        [([1, 0, 0, 0], ket("00")), ([0.5, 0.5, 0.5, 0.5], np.full(4, 0.5, dtype=complex))],
    )
    def test_d3_named(self, lam, target):
        for b in self._d3(lam).branches:
            assert abs(fidelity(target, b.vector(["w1", "w2"])) - 1) < 1e-12

    def test_d3_random(self):
        r = np.random.default_rng(9)
        for _ in range(50):
            lam = random_state(4, r)
            for b in self._d3(lam).branches:
                assert abs(fidelity(lam, b.vector(["w1", "w2"])) - 1) < 1e-10


class TestEisert:
    def test_identity(self):
        chan, _ = circuit_channel(eisert_circuit(I2))
        assert chan.distance(choi_of_unitary(np.eye(4))) < 1e-10

    def test_x_makes_bell(self):
        c = eisert_circuit(X)
        bell = (ket("00") + ket("11")) / np.sqrt(2)
        for b in simulate(c, np.kron(PLUS, ket(0, 2)), merge=False).branches:
            assert abs(fidelity(bell, b.vector(["c", "t"])) - 1) < 1e-12

    def test_random(self):
        r = np.random.default_rng(10)
        for _ in range(100):
            u = random_unitary(2, r)
            psi = random_state(4, r)
            target = controlled_matrix(u, [2], [1]) @ psi
            for b in simulate(eisert_circuit(u), psi).branches:
                assert abs(fidelity(target, b.vector(["c", "t"])) - 1) < 1e-10

    def test_resources(self):
        tr = locc_validate(eisert_circuit(X), PAIR)
        assert tr.valid
        assert tr.classical_bits == 3
        assert len(tr.epr_edges) == 1


class TestFullyControlled:
    def test_identity(self):
        chan, _ = circuit_channel(fc3_circuit({}))
        assert chan.distance(choi_of_unitary(np.eye(8))) < 1e-10

    def test_first_butterfly_gate(self):
        us = {(0, 0): I2, (1, 1): I2, (0, 1): Z, (1, 0): Z}
        direct = np.zeros((8, 8), dtype=complex)
        for a in (0, 1):
            for b in (0, 1):
                p = np.zeros((4, 4))
                p[2 * a + b, 2 * a + b] = 1
                direct += np.kron(p, us[(a, b)])
        assert_allclose(fully_controlled_matrix(us, 2), direct)
        chan, _ = circuit_channel(fc3_circuit(us))
        assert chan.distance(choi_of_unitary(direct)) < 1e-10

    def test_random(self):
        r = np.random.default_rng(13)
        for _ in range(50):
            us = random_us(r)
            psi = random_state(8, r)
            target = fully_controlled_matrix(us, 2) @ psi
            for b in simulate(fc3_circuit(us), psi).branches:
                assert abs(fidelity(target, b.vector(["l", "m", "n"])) - 1) < 1e-10

    def test_locc_valid_on_line(self, rng):
        assert locc_validate(fc3_circuit(random_us(rng)), LINE).valid


class TestLoccValidate:
    def test_teleport_valid(self):
        tr = locc_validate(teleport_circuit(), PAIR)
        assert tr.valid and tr.classical_bits == 2

    def test_bare_cnot(self):
        c = Circuit()
        c.add_wire("x", "a")
        c.add_wire("y", "b")
        c.cnot("x", "y")
        tr = locc_validate(c, PAIR)
        assert not tr.valid
        assert "spans nodes" in tr.violations[0]["reason"]

    def test_edge_reuse(self):
        c = Circuit()
        c.epr("p", "q", "a", "b", "e").epr("r", "s", "a", "b", "e")
        assert not locc_validate(c, PAIR).valid

    def test_missing_edge(self):
        c = Circuit()
        c.add_wire("x", "L")
        c.transfer("x", "M")
        assert not locc_validate(c, LINE).valid

    def test_butterfly_protocol_valid(self):
        tr = locc_validate(butterfly_unitary_protocol(0.3, 0.2, 0.1), build_named("butterfly"))
        assert tr.valid
        assert len(tr.epr_edges) == 7


GADGETS = {
    "teleport": teleport_circuit,
    "eisert_x": lambda: eisert_circuit(X),
    "eisert_h": lambda: eisert_circuit(H),
    "fc3": lambda: fc3_circuit({(0, 1): Z, (1, 0): X @ Z}),
}


class TestCorpusInvariants:
    @pytest.mark.parametrize("name", sorted(GADGETS))
    def test_deferred_equivalence(self, name):
        c = GADGETS[name]()
        a, _ = circuit_channel(c)
        b, _ = circuit_channel(deferred(c))
        assert a.distance(b) <= 1e-9

    @pytest.mark.parametrize("name", sorted(GADGETS))
    def test_probability_normalisation(self, name):
        c = GADGETS[name]()
        r = np.random.default_rng(1)
        psi = random_state(c.input_dim(), r)
        assert abs(simulate(c, psi, merge=False).total_probability() - 1) <= 1e-10

    @given(seeds)
    def test_butterfly_probability_normalisation(self, seed):
        r = np.random.default_rng(seed)
        x, y, z = r.uniform(-np.pi, np.pi, 3)
        c = butterfly_unitary_protocol(x, y, z)
        assert abs(simulate(c, random_state(c.input_dim(), r)).total_probability() - 1) <= 1e-10

    def test_json_round_trip(self):
        c = fc3_circuit({(0, 1): Z})
        back = Circuit.from_json(c.to_json())
        a, _ = circuit_channel(c)
        b, _ = circuit_channel(back)
        assert a.distance(b) < 1e-14
