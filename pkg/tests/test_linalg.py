import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qnet.linalg import (
    CNOT,
    MAX_DIM,
    DimensionError,
    H,
    I2,
    X,
    Y,
    Z,
    as_matrix,
    as_state,
    dagger,
    eig_hermitian,
    frobenius_distance,
    is_unitary,
    ket,
    kron,
    matmul,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    permute_subsystems,
    phase_distance,
    proj,
    random_density,
    random_state,
    random_unitary,
    svd,
)

PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
seeds = st.integers(0, 2**32 - 1)


class TestKron:
    def test_identity(self):
        assert_allclose(kron(I2, I2), np.eye(4))

    def test_block_structure(self):
        assert_allclose(kron(proj(ket(0, 2)), Z), np.diag([1, -1, 0, 0]))

    def test_xx_fixes_phi_plus(self):
        assert_allclose(kron(X, X) @ PHI_PLUS, PHI_PLUS)

    def test_empty_and_many(self):
        assert_allclose(kron(), [[1]])
        assert kron(I2, I2, I2).shape == (8, 8)

    def test_associativity_exact_on_integers(self):
        r = np.random.default_rng(1)
        a, b, c = (r.integers(-3, 4, size=(2, 2)) for _ in range(3))
        assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))

    @given(seeds)
    def test_associativity_random(self, seed):
        r = np.random.default_rng(seed)
        a, b, c = (r.normal(size=(2, 3)) + 1j * r.normal(size=(2, 3)) for _ in range(3))
        assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-12)

    def test_dimension_guard(self):
        with pytest.raises(DimensionError):
            kron(np.eye(2), np.eye(MAX_DIM))


class TestPartialTrace:
    def test_phi_plus_marginal(self):
        assert_allclose(partial_trace(proj(PHI_PLUS), [2, 2], [0]), I2 / 2, atol=1e-15)

    def test_product_state(self, rng):
        ra, rb = random_density(2, rng), random_density(3, rng)
        assert_allclose(partial_trace(np.kron(ra, rb), [2, 3], [0]), ra, atol=1e-14)
        assert_allclose(partial_trace(np.kron(ra, rb), [2, 3], [1]), rb, atol=1e-14)

    def test_trace_everything(self, rng):
        rho = random_density(6, rng)
        assert_allclose(partial_trace(rho, [2, 3], []), [[np.trace(rho)]], atol=1e-14)

    def test_keep_order_is_original(self, rng):
        a, b, c = (random_density(2, rng) for _ in range(3))
        out = partial_trace(kron(a, b, c), [2, 2, 2], [2, 0])
        assert_allclose(out, np.kron(a, c), atol=1e-14)

    @given(seeds, st.sampled_from([[2, 2], [2, 3], [3, 2, 2]]))
    def test_trace_preserved_and_linear(self, seed, dims):
        r = np.random.default_rng(seed)
        n = int(np.prod(dims))
        m1 = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
        m2 = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
        keep = [0]
        assert abs(np.trace(partial_trace(m1, dims, keep)) - np.trace(m1)) <= 1e-12 * max(1, abs(np.trace(m1)))
        lhs = partial_trace(2 * m1 - 1j * m2, dims, keep)
        rhs = 2 * partial_trace(m1, dims, keep) - 1j * partial_trace(m2, dims, keep)
        assert_allclose(lhs, rhs, atol=1e-12)

    def test_bad_dims(self):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(4), [2, 3], [0])
        with pytest.raises(DimensionError):
            partial_trace(np.eye(4), [2, 2], [5])


class TestPermute:
    def test_swap_factors(self, rng):
        a, b = random_density(2, rng), random_density(3, rng)
        assert_allclose(permute_subsystems(np.kron(a, b), [2, 3], [1, 0]), np.kron(b, a), atol=1e-14)

    def test_vector(self):
        v = np.kron(ket(0, 2), ket(1, 3))
        assert_allclose(permute_subsystems(v, [2, 3], [1, 0]), np.kron(ket(1, 3), ket(0, 2)))


class TestSvd:
    def test_identity(self):
        assert_allclose(svd(I2)[1], [1, 1])

    def test_diag(self):
        assert_allclose(svd(np.diag([3, 0]))[1], [3, 0])

    def test_unitary_singular_values(self):
        r = np.random.default_rng(7)
        for _ in range(100):
            assert_allclose(svd(random_unitary(4, r))[1], np.ones(4), atol=1e-10)

    @given(seeds, st.integers(1, 64), st.integers(1, 64))
    def test_reconstruction(self, seed, m, n):
        r = np.random.default_rng(seed)
        a = r.normal(size=(m, n)) + 1j * r.normal(size=(m, n))
        u, s, vh = svd(a)
        assert np.linalg.norm(u @ np.diag(s) @ vh - a) <= 1e-10 * max(1.0, np.linalg.norm(a))
        assert np.all(np.diff(s) <= 1e-12)


class TestEigHermitian:
    def test_z(self):
        assert_allclose(eig_hermitian(Z)[0], [-1, 1])

    def test_x_vectors(self):
        w, v = eig_hermitian(X)
        assert_allclose(w, [-1, 1])
        minus = np.array([1, -1]) / np.sqrt(2)
        plus = np.array([1, 1]) / np.sqrt(2)
        assert abs(abs(np.vdot(v[:, 0], minus)) - 1) < 1e-12
        assert abs(abs(np.vdot(v[:, 1], plus)) - 1) < 1e-12

    def test_gram_pattern_at_d3(self):
        d = 3
        g = np.array([[d + 1, d - 1, d - 1], [d - 1, d + 1, d + 1], [d - 1, d + 1, d + 1]], dtype=complex)
        # independent closed form: (0, 1, -1) is a null vector, the rest is the 2x2 block [[4, 2 sqrt2], [2 sqrt2, 8]]
        expected = [0.0, 6 - np.sqrt(12), 6 + np.sqrt(12)]
        assert_allclose(eig_hermitian(g)[0], expected, atol=1e-12)
        # normalised by the trace these are the closed-form lambda^2 values (12 -/+ sqrt 48) / 24
        assert_allclose(np.array(expected[1:]) / 12, [(12 - np.sqrt(48)) / 24, (12 + np.sqrt(48)) / 24], atol=1e-14)

    @given(seeds, st.integers(1, 64))
    def test_residual(self, seed, n):
        r = np.random.default_rng(seed)
        a = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
        m = a + dagger(a)
        w, v = eig_hermitian(m)
        assert np.linalg.norm(m @ v - v * w) <= 1e-9 * max(1.0, np.linalg.norm(m))
        assert np.all(np.diff(w) >= -1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            eig_hermitian(np.array([[0, 1], [0, 0]]))


class TestSmallOps:
    def test_frobenius_identity(self):
        assert frobenius_distance(I2, I2) == 0

    def test_dagger_paulis(self):
        assert_allclose(dagger(X), X)
        assert_allclose(dagger(Y), Y)

    def test_matmul_h(self):
        assert_allclose(matmul(H, H), I2, atol=1e-15)

    def test_matmul_shape_error(self):
        with pytest.raises(DimensionError):
            matmul(np.eye(2), np.eye(3))

    def test_phase_distance(self):
        assert phase_distance(1j * CNOT, CNOT) < 1e-14
        assert phase_distance(X, Z) > 1

    def test_ket_bitstring(self):
        assert_allclose(ket("10"), [0, 0, 1, 0])

    def test_random_generators(self, rng):
        assert is_unitary(random_unitary(5, rng))
        assert abs(np.linalg.norm(random_state(5, rng)) - 1) < 1e-14
        rho = random_density(4, rng, rank=2)
        assert abs(np.trace(rho) - 1) < 1e-14
        assert np.linalg.matrix_rank(rho, tol=1e-10) == 2


class TestValidation:
    def test_as_matrix_rejects(self):
        with pytest.raises(DimensionError):
            as_matrix(np.ones(3))
        with pytest.raises(ValueError):
            as_matrix([[np.nan]])
        with pytest.raises(DimensionError):
            as_matrix(np.eye(2), rows=3)

    def test_as_state_norm(self):
        with pytest.raises(ValueError):
            as_state([1, 1])
        assert_allclose(as_state([1, 1], normalized=False), [1, 1])

    @given(seeds, st.integers(1, 5), st.integers(1, 5))
    def test_json_round_trip(self, seed, m, n):
        r = np.random.default_rng(seed)
        a = r.normal(size=(m, n)) + 1j * r.normal(size=(m, n))
        assert np.array_equal(matrix_from_json(matrix_to_json(a)), a)

    def test_json_malformed(self):
        with pytest.raises(ValueError):
            matrix_from_json({"rows": 2})
        with pytest.raises(DimensionError):
            matrix_from_json({"rows": 2, "cols": 2, "re": [1, 2, 3], "im": [0, 0, 0]})
