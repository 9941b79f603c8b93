import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qnet.decomp import operator_schmidt_rank
from qnet.discrimination import (
    DiscriminationEnsemble,
    FamilyError,
    a_support,
    computational_basis,
    d_min,
    d_min_bruteforce,
    design_tree,
    embed_b,
    entanglement_gap_report,
    generalized_basis,
    generalized_gadget,
    generalized_v,
    nine_states,
    one_way_protocol,
    overlaps,
    primed_generalized,
    primed_nine_states,
    product_tiles,
    run_tree,
    schmidt_strength_closed_form,
    schmidt_strength_numeric,
    two_way_protocol,
    v_d,
    v_d_gadget,
    vd_gram,
)


def ket(j, d):
    v = np.zeros(d, dtype=complex)
    v[j] = 1
    return v


class TestEnsembles:
    def test_nine_orthonormal_product(self):
        ens = nine_states()
        g = np.array([[np.vdot(a, b) for b in ens.states] for a in ens.states])
        assert_allclose(g, np.eye(9), atol=1e-12)
        for s in ens.states:
            assert np.linalg.matrix_rank(s.reshape(3, 3), tol=1e-10) == 1

    def test_psi9_is_center(self):
        assert_allclose(nine_states().states[8], np.kron(ket(1, 3), ket(1, 3)))

    @pytest.mark.parametrize("da,db", [(4, 3), (5, 3), (4, 4), (6, 5)])
    def test_generalized_size(self, da, db):
        ens = generalized_basis(da, db)
        assert len(ens) == da * db
        for s in ens.states:
            assert_allclose(np.linalg.norm(s), 1.0)
            assert np.linalg.matrix_rank(s.reshape(da, db), tol=1e-10) == 1

    @pytest.mark.parametrize("da,db", [(3, 3), (4, 2), (2, 5)])
    def test_generalized_out_of_family(self, da, db):
        with pytest.raises(FamilyError):
            generalized_basis(da, db)

    def test_non_orthonormal_rejected(self):
        with pytest.raises(ValueError):
            DiscriminationEnsemble((ket(0, 4), ket(0, 4)), (2, 2), basis=False)

    def test_incomplete_basis_rejected(self):
        with pytest.raises(ValueError):
            DiscriminationEnsemble((ket(0, 4),), (2, 2))

    def test_json(self):
        js = nine_states().to_json()
        assert js["dims"] == [3, 3] and len(js["states"]) == 9


class TestDmin:
    @pytest.mark.parametrize(
        "ens,expected",
        [
            (nine_states(), 3),
            (generalized_basis(4, 3), 4),
            (generalized_basis(5, 3), 5),
            (generalized_basis(4, 4), 4),
            (computational_basis(2, 3), 1),
        ],
        ids=["nine", "gen43", "gen53", "gen44", "computational"],
    )
    def test_values_and_exhaustive_agreement(self, ens, expected):
        value, part = d_min(ens)
        assert value == expected
        assert d_min_bruteforce(ens) == expected
        assert part.validate(ens)

    def test_support(self):
        s = nine_states().states[0]
        supp = a_support(s, (3, 3))
        assert supp.shape == (3, 1)
        assert_allclose(np.abs(supp[:, 0]), [1, 0, 0], atol=1e-12)

    def test_overlaps(self):
        e0, e1 = ket(0, 3)[:, None], ket(1, 3)[:, None]
        assert not overlaps(e0, e1)
        assert overlaps(e0, (e0 + e1) / np.sqrt(2))

    @given(st.integers(0, 2**32 - 1))
    def test_local_unitary_on_b_invariance(self, seed):
        r = np.random.default_rng(seed)
        g = r.normal(size=(3, 3)) + 1j * r.normal(size=(3, 3))
        u, _ = np.linalg.qr(g)
        ens = nine_states()
        rotated = DiscriminationEnsemble(tuple(np.kron(np.eye(3), u) @ s for s in ens.states), (3, 3))
        assert d_min(rotated)[0] == 3


class TestOneWay:
    @pytest.mark.parametrize("ens", [nine_states(), generalized_basis(4, 3)], ids=["nine", "gen43"])
    def test_zero_error_with_dmin_rank(self, ens):
        value, part = d_min(ens)
        run = one_way_protocol(ens, part)
        assert run.resource_rank == value
        assert run.zero_error

    def test_product_basis_needs_no_entanglement(self):
        run = one_way_protocol(computational_basis(2, 2))
        assert run.resource_rank == 1 and run.zero_error


class TestVd:
    @pytest.mark.parametrize("d", [3, 4, 8, 16])
    def test_unitary_rank_two(self, d):
        v = v_d(d)
        assert_allclose(v @ v.conj().T, np.eye(3 * (d + 1)), atol=1e-12)
        assert operator_schmidt_rank(v, (3, d + 1)) == 2

    def test_undefined_below_three(self):
        with pytest.raises(FamilyError):
            v_d(2)

    def test_primed_first_state(self):
        d = 4
        psi = primed_nine_states(d).states[0]
        expected = np.kron(ket(0, 3), (ket(0, d + 1) + ket(3, d + 1)) / np.sqrt(2))
        assert_allclose(psi, expected, atol=1e-12)

    def test_primed_is_product(self):
        for s in primed_nine_states(5).states:
            assert np.linalg.matrix_rank(s.reshape(3, 6), tol=1e-10) == 1

    def test_embed_b(self):
        ens = embed_b(nine_states(), 5)
        assert ens.dims == (3, 5) and not ens.basis


class TestTwoWay:
    @pytest.mark.parametrize("d", range(3, 9))
    def test_zero_error(self, d):
        run = two_way_protocol(d)
        assert run.zero_error
        assert run.completeness_defect <= 1e-12

    def test_center_state_path(self):
        assert two_way_protocol(4).paths[8] == [("B", 1), ("A", 0), ("B", 0)]

    def test_unprimed_nine_states_fail(self):
        with pytest.raises(RuntimeError):
            design_tree(nine_states())

    def test_generalized(self):
        ens = primed_generalized(4, 3)
        assert run_tree(design_tree(ens), ens).zero_error

    def test_tiles_cover_states(self):
        tiles = product_tiles(primed_nine_states(4))
        members = sorted(m for t in tiles for m in t.members)
        assert members == list(range(9))


class TestGadget:
    @pytest.mark.parametrize("d", [3, 4, 8])
    def test_v_d_gadget(self, d):
        rep = v_d_gadget(d)
        assert rep.channel_error <= 1e-9
        assert rep.locc_valid and rep.epr_pairs == 1
        assert rep.operator_schmidt_rank == 2

    def test_generalized_gadget(self):
        rep = generalized_gadget(4, 3)
        assert rep.channel_error <= 1e-9 and rep.locc_valid and rep.epr_pairs == 1

    def test_generalized_v_rank(self):
        assert operator_schmidt_rank(generalized_v(5, 3), (5, 4)) == 2


class TestGapReport:
    @pytest.mark.parametrize("da,db,one_way", [(3, 3, 3), (4, 3, 4), (5, 3, 5)])
    def test_gap(self, da, db, one_way):
        rep = entanglement_gap_report(da, db)
        assert rep["one_way_rank"] == one_way
        assert rep["two_way_rank"] == 2
        c = rep["certificates"]
        assert c["one_way_zero_error"] and c["two_way_zero_error"]
        assert c["gadget"]["locc_valid"]


class TestSchmidtStrength:
    def test_three_frozen(self):
        assert_allclose(schmidt_strength_closed_form(3)[2], 0.7440075512, atol=1e-9)

    @pytest.mark.parametrize("d", [3, 4, 7, 16, 64])
    def test_closed_form_matches_numeric(self, d):
        assert_allclose(schmidt_strength_numeric(d), schmidt_strength_closed_form(d), atol=1e-9)

    def test_normalized(self):
        for d in (3, 10, 50):
            l0, l1, _ = schmidt_strength_closed_form(d)
            assert_allclose(l0 + l1, 1.0, atol=1e-14)

    def test_strictly_decreasing(self):
        hs = [schmidt_strength_closed_form(d)[2] for d in range(3, 65)]
        assert all(a > b for a, b in zip(hs, hs[1:]))

    def test_crossovers(self):
        h = {d: schmidt_strength_closed_form(d)[2] for d in range(3, 200)}
        assert min(d for d in h if h[d] < 0.2) == 28
        assert min(d for d in h if h[d] < 0.1) == 68
        assert_allclose(h[64], 0.104126, atol=1e-6)

    @pytest.mark.parametrize("d", [3, 4, 9])
    def test_gram(self, d):
        g = vd_gram(d).real
        expected = np.array([[d + 1, d - 1, d - 1], [d - 1, d + 1, d + 1], [d - 1, d + 1, d + 1]], dtype=float)
        assert_allclose(g, expected, atol=1e-12)
        ev = np.sort(np.linalg.eigvalsh(g)) / np.trace(g)
        l0, l1, _ = schmidt_strength_closed_form(d)
        assert_allclose(ev, [0.0, l0, l1], atol=1e-12)
