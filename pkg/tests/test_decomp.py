import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qnet.decomp import (
    TABLE_ROWS,
    ClassificationError,
    canonical_gate,
    classify,
    controlled_phase_canonicalize,
    cphase,
    is_controlled_form,
    kc_from_op_rank,
    kc_number,
    kraus_cirac,
    operator_schmidt,
    operator_schmidt_rank,
    schmidt,
    schmidt_rank,
    schmidt_strength,
    split_local,
)
from qnet.discrimination import v_d
from qnet.linalg import CNOT, CZ, SWAP, H, I2, S, X, Z, DimensionError, ket, kron, random_state, random_unitary

PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
seeds = st.integers(0, 2**32 - 1)
ROW_PAIRS = {(op, kc) for op, kc, _ in TABLE_ROWS}


def phi9():
    return (ket("0000") + ket("0111")) / np.sqrt(2)


def pairing_ranks(state):
    t = state.reshape(2, 2, 2, 2)
    out = []
    for partner in (1, 2, 3):
        rest = [q for q in (1, 2, 3) if q != partner]
        m = t.transpose([0, partner] + rest).reshape(4, 4)
        out.append(schmidt_rank(m.reshape(-1), (4, 4)))
    return sorted(out)


class TestSchmidt:
    def test_phi_plus(self):
        dec = schmidt(PHI_PLUS, (2, 2))
        assert dec.rank == 2
        assert_allclose(dec.coefficients, [1 / np.sqrt(2)] * 2)

    def test_product(self):
        assert schmidt_rank(ket("00"), (2, 2)) == 1

    def test_phi9_pairings(self):
        assert pairing_ranks(phi9()) == [2, 2, 2]

    def test_dims_mismatch(self):
        with pytest.raises(DimensionError):
            schmidt(ket("00"), (3, 2))

    @given(seeds)
    def test_local_unitary_invariance(self, seed):
        r = np.random.default_rng(seed)
        psi = random_state(2, r)
        state = np.kron(psi, ket(0, 3)) + np.kron(ket(1, 2), ket(2, 3))
        state /= np.linalg.norm(state)
        before = schmidt_rank(state, (2, 3))
        after = schmidt_rank(np.kron(random_unitary(2, r), random_unitary(3, r)) @ state, (2, 3))
        assert before == after


class TestOperatorSchmidt:
    @pytest.mark.parametrize("u, rank", [(SWAP, 4), (CNOT, 2), (np.kron(H, S), 1), (np.eye(4), 1)])
    def test_named(self, u, rank):
        assert operator_schmidt_rank(u) == rank

    def test_swap_coefficients(self):
        assert_allclose(operator_schmidt(SWAP, (2, 2)).coefficients, [0.5] * 4, atol=1e-14)

    @given(seeds)
    def test_reconstruction(self, seed):
        r = np.random.default_rng(seed)
        u = random_unitary(6, r)
        assert np.linalg.norm(operator_schmidt(u, (2, 3)).reconstruct() - u) < 1e-12

    @pytest.mark.parametrize("theta", [0.1, 1.0, np.pi / 2, np.pi, 5.0])
    def test_cphase_rank_two(self, theta):
        assert operator_schmidt_rank(cphase(theta)) == 2

    def test_cphase_zero(self):
        assert operator_schmidt_rank(cphase(0.0)) == 1

    def test_split_local(self, rng):
        a, b = random_unitary(2, rng), random_unitary(3, rng)
        fa, fb = split_local(np.kron(a, b), (2, 3))
        assert_allclose(np.kron(fa, fb), np.kron(a, b), atol=1e-12)
        assert_allclose(fa.conj().T @ fa, I2, atol=1e-12)


class TestKrausCirac:
    def test_swap(self):
        kc = kraus_cirac(SWAP)
        assert kc.kc_number == 3
        assert_allclose(kc.params, [np.pi / 4] * 3, atol=1e-12)

    def test_cnot(self):
        kc = kraus_cirac(CNOT)
        assert kc.kc_number == 1
        assert_allclose(kc.params, [np.pi / 4, 0, 0], atol=1e-12)

    def test_local(self, rng):
        kc = kraus_cirac(np.kron(random_unitary(2, rng), random_unitary(2, rng)))
        assert kc.kc_number == 0
        assert_allclose(kc.params, [0, 0, 0], atol=1e-9)

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            kraus_cirac(np.diag([1, 1, 1, 2]))

    @given(seeds)
    def test_reconstruction_and_chamber(self, seed):
        r = np.random.default_rng(seed)
        u = random_unitary(4, r)
        kc = kraus_cirac(u)
        assert kc.reconstruction_error <= 1e-8
        assert np.linalg.norm(kc.reconstruct() - u) <= 1e-8
        eps = 1e-12
        assert -eps <= kc.x < np.pi / 2
        assert -eps <= kc.y <= min(kc.x, np.pi / 2 - kc.x) + eps
        assert -eps <= kc.z <= kc.y + eps

    @given(seeds, st.floats(0.05, np.pi / 2 - 0.05), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_canonical_gate_recovers_params(self, seed, x, fy, fz):
        ymax = min(x, np.pi / 2 - x) - 0.02
        if ymax <= 0.04:
            return
        y = 0.02 + fy * (ymax - 0.02)
        z = 0.01 + fz * (y - 0.02)
        r = np.random.default_rng(seed)
        locals_ = [random_unitary(2, r) for _ in range(4)]
        u = np.kron(locals_[0], locals_[1]) @ canonical_gate(x, y, z) @ np.kron(locals_[2], locals_[3])
        kc = kraus_cirac(u)
        assert_allclose(kc.params, [x, y, z], atol=1e-7)

    def test_haar_concordance(self):
        r = np.random.default_rng(11)
        counts = {0: 0, 1: 0, 2: 0, 3: 0}
        for _ in range(200):
            rep = classify(random_unitary(4, r))
            assert (rep["op_rank"], rep["kc_number"]) in ROW_PAIRS
            assert rep["reconstruction_error"] <= 1e-8
            counts[rep["kc_number"]] += 1
        assert counts[3] == 200

    def test_kc_number_helper(self):
        assert kc_number(SWAP) == 3


class TestControlledPhase:
    def test_cz(self):
        u1, u2, u3, u4, theta = controlled_phase_canonicalize(CZ)
        assert abs(theta - np.pi) < 1e-12
        for m in (u1, u2, u3, u4):
            assert_allclose(m, I2, atol=1e-12)

    def test_cnot(self):
        u1, u2, u3, u4, theta = controlled_phase_canonicalize(CNOT)
        assert abs(abs(theta) - np.pi) < 1e-12
        assert_allclose(u2, H, atol=1e-12)
        assert_allclose(u4, u2.conj().T, atol=1e-12)
        recon = np.kron(u3, u4) @ cphase(theta) @ np.kron(u1, u2)
        assert_allclose(recon, CNOT, atol=1e-12)

    def test_controlled_s(self):
        cs = np.diag([1, 1, 1, 1j])
        *_, theta = controlled_phase_canonicalize(cs)
        assert abs(theta - np.pi / 2) < 1e-12

    @given(seeds)
    def test_random_controlled(self, seed):
        r = np.random.default_rng(seed)
        v = random_unitary(2, r)
        u = np.block([[I2, np.zeros((2, 2))], [np.zeros((2, 2)), v]])
        u1, u2, u3, u4, theta = controlled_phase_canonicalize(u)
        assert_allclose(np.kron(u3, u4) @ cphase(theta) @ np.kron(u1, u2), u, atol=1e-10)

    def test_rejects(self):
        assert not is_controlled_form(SWAP)
        assert is_controlled_form(CNOT)


class TestClassification:
    def test_rows(self):
        assert kc_from_op_rank(1)["kc_number"] == 0
        assert kc_from_op_rank(2)["kc_number"] == 1
        assert kc_from_op_rank(4, True)["kc_number"] == 2
        assert kc_from_op_rank(4, False)["kc_number"] == 3
        with pytest.raises(ClassificationError):
            kc_from_op_rank(3)
        with pytest.raises(ValueError):
            kc_from_op_rank(5)

    def test_matchgate_class(self):
        rep = classify(canonical_gate(0.5, 0.3, 0.0))
        assert rep["kc_number"] == 2 and rep["op_rank"] == 4
        assert rep["class"] == "matchgate"

    @pytest.mark.parametrize(
        "u, op, kc",
        [(SWAP, 4, 3), (CNOT, 2, 1), (CZ, 2, 1), (np.eye(4), 1, 0), (np.kron(H, I2), 1, 0), (np.kron(X, Z), 1, 0)],
    )
    def test_named_gates(self, u, op, kc):
        rep = classify(u)
        assert (rep["op_rank"], rep["kc_number"]) == (op, kc)


class TestSchmidtStrength:
    def test_product(self, rng):
        assert abs(schmidt_strength(kron(random_unitary(2, rng), random_unitary(2, rng)))) < 1e-9

    def test_swap(self):
        assert abs(schmidt_strength(SWAP) - 2) < 1e-12

    def test_v3_closed_form(self):
        lam = np.array([(12 - np.sqrt(48)) / 24, (12 + np.sqrt(48)) / 24])
        expected = float(-np.sum(lam * np.log2(lam)))
        assert abs(schmidt_strength(v_d(3), (3, 4)) - expected) < 1e-9
        assert abs(expected - 0.7440075512) < 1e-9
