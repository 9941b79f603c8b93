import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qnet.linalg import I2, X, random_state
from qnet.locc_star import (
    AlphabetError,
    CcStar,
    NormalizationError,
    ProcessMatrix,
    assemble_locc_star,
    b8_process_matrix,
    bold_projector,
    cc_star_from_classical_process,
    check_no_signaling,
    cptp_spanning_set,
    gamma_cc_star,
    gamma_sep_terms,
    gamma_triples,
    lemma3_structure_check,
    multipartite_sep_to_locc_star,
    nine_state_sep_terms,
    nine_state_table_map,
    nine_state_vectors,
    one_way_process,
    random_cptp_choi,
    random_sep_terms,
    sep_choi,
    sep_to_locc_star,
    to_loop_form,
    tripartite_gamma,
    validate_process_matrix,
)
from qnet.ops import QuantumInstrument, kraus_to_choi

seeds = st.integers(0, 2**32 - 1)
P0, P1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])


def one_way_map():
    """Alice measures Z and Bob applies X^bit."""
    alice = QuantumInstrument(2, 2, {0: {0: [P0], 1: [P1]}})
    bob = QuantumInstrument(2, 2, {0: {0: [I2]}, 1: {0: [X]}})
    table = {((0, a), (a, 0)): 1.0 for a in (0, 1)}
    cc = CcStar(("A", "B"), [(0,), (0, 1)], [(0, 1), (0,)], table)
    return assemble_locc_star([alice, bob], cc)


def one_way_direct():
    ks = [np.kron(P0, I2), np.kron(P1, X)]
    return kraus_to_choi(ks)


def basis_ket(k, d):
    v = np.zeros(d)
    v[k] = 1
    return v


class TestAssembly:
    def test_one_way_matches_direct(self):
        m = one_way_map()
        assert m.cp and m.tp
        assert_allclose(m.choi.matrix, one_way_direct().matrix, atol=1e-12)

    def test_cp_without_tp(self):
        # copying loop: both consistent assignments survive, so the trace doubles
        a = QuantumInstrument(2, 2, {b: {b: [I2]} for b in (0, 1)})
        b = QuantumInstrument(2, 2, {x: {x: [I2]} for x in (0, 1)})
        m = assemble_locc_star([a, b], CcStar.loop((0, 1), (0, 1)))
        assert m.cp and not m.tp
        assert_allclose(m.choi.matrix, 2 * kraus_to_choi([np.eye(4)]).matrix, atol=1e-12)

    @given(seeds)
    def test_cp_always(self, seed):
        r = np.random.default_rng(seed)
        labs = (0, 1)
        table = {}
        for o in itertools.product(labs, labs):
            w = r.dirichlet(np.ones(4))
            for i, p in zip(itertools.product(labs, labs), w):
                table[(i, o)] = float(p)
        cc = CcStar(("A", "B"), [labs, labs], [labs, labs], table)

        def inst():
            el = {}
            for i in labs:
                q, _ = np.linalg.qr(r.normal(size=(4, 2)) + 1j * r.normal(size=(4, 2)))
                el[i] = {0: [q[:2]], 1: [q[2:]]}
            return QuantumInstrument(2, 2, el)

        assert assemble_locc_star([inst(), inst()], cc).cp

    def test_party_count_mismatch(self):
        with pytest.raises(AlphabetError):
            assemble_locc_star([QuantumInstrument(2, 2, {0: {0: [I2]}})], CcStar.loop((0,), (0,)))

    def test_input_alphabet_mismatch(self):
        inst = QuantumInstrument(2, 2, {0: {0: [I2]}})
        with pytest.raises(AlphabetError):
            assemble_locc_star([inst, inst], CcStar.loop((0, 1), (0,)))


class TestLoopForm:
    def test_one_way(self):
        m = one_way_map()
        loop = to_loop_form(m)
        assert_allclose(loop.choi.matrix, m.choi.matrix, atol=1e-12)
        assert loop.cc.table == CcStar.loop(loop.cc.out_alphabets[0], loop.cc.out_alphabets[1]).table

    def test_loop_of_loop(self):
        m = nine_state_table_map()
        assert_allclose(to_loop_form(m).choi.matrix, m.choi.matrix, atol=1e-12)

    def test_three_parties_rejected(self):
        with pytest.raises(ValueError):
            to_loop_form(tripartite_gamma().map)


class TestNineState:
    def test_table_map_identifies(self):
        m = nine_state_table_map()
        assert m.tp
        for k, psi in enumerate(nine_state_vectors()):
            out = m.apply(np.outer(psi, psi.conj()))
            kk = np.kron(basis_ket(k, 9), basis_ket(k, 9))
            assert np.linalg.norm(out - np.outer(kk, kk)) <= 1e-12

    @pytest.mark.parametrize("k", [0, 8])
    def test_first_and_last(self, k):
        psi = nine_state_vectors()[k]
        out = nine_state_table_map().apply(np.outer(psi, psi.conj()))
        assert_allclose(out[k * 10, k * 10].real, 1.0, atol=1e-12)

    def test_completeness(self):
        assert max(nine_state_table_map().completeness_defects()) <= 1e-12

    def test_not_no_signaling(self):
        cc = nine_state_table_map().cc
        assert not check_no_signaling(cc, [("A", "B")])
        assert not check_no_signaling(cc, [("B", "A")])

    def test_matches_sep(self):
        ref = sep_choi(nine_state_sep_terms(), ((3, 9), (3, 9)))
        assert nine_state_table_map().choi.distance(ref) <= 1e-10


class TestSepToLoccStar:
    def test_identity(self):
        terms = [(kraus_to_choi([I2]).matrix, kraus_to_choi([I2]).matrix)]
        m = sep_to_locc_star(terms, ((2, 2), (2, 2)))
        assert m.tp and m.cp
        assert m.choi.distance(kraus_to_choi([np.eye(4)])) <= 1e-10
        assert m.cc.in_alphabets[0] == (1, 2, 3, 4)

    def test_nine_state(self):
        dims = ((3, 9), (3, 9))
        m = sep_to_locc_star(nine_state_sep_terms(), dims)
        assert m.choi.distance(sep_choi(nine_state_sep_terms(), dims)) <= 1e-9
        assert max(m.completeness_defects()) <= 1e-9

    @pytest.mark.parametrize("dims", [((2, 2), (2, 2)), ((2, 3), (3, 2)), ((3, 3), (3, 3))])
    def test_random(self, dims):
        r = np.random.default_rng(5)
        for _ in range(4):
            terms = random_sep_terms(dims, r)
            m = sep_to_locc_star(terms, dims)
            assert m.tp
            assert m.choi.distance(sep_choi(terms, dims)) <= 1e-9
            assert max(m.completeness_defects()) <= 1e-9

    def test_random_terms_are_tp(self, rng):
        assert sep_choi(random_sep_terms(((2, 3), (3, 2)), rng), ((2, 3), (3, 2))).is_tp()

    def test_non_tp_rejected(self):
        p0 = kraus_to_choi([P0]).matrix
        with pytest.raises(ValueError):
            sep_to_locc_star([(p0, p0)], ((2, 2), (2, 2)))

    def test_dims_must_be_bipartite(self):
        with pytest.raises(ValueError):
            sep_to_locc_star(gamma_sep_terms(), ((2, 4),) * 3)


class TestMultipartite:
    def test_two_parties_equal_bipartite(self, rng):
        dims = ((2, 2), (2, 2))
        terms = random_sep_terms(dims, rng)
        m = multipartite_sep_to_locc_star(terms, dims)
        assert m.choi.distance(sep_choi(terms, dims)) <= 1e-9

    def test_gamma(self):
        dims = ((2, 4),) * 3
        m = multipartite_sep_to_locc_star(gamma_sep_terms(), dims)
        assert m.tp
        assert m.choi.distance(tripartite_gamma().choi) <= 1e-9

    def test_identity(self):
        e = kraus_to_choi([I2]).matrix
        m = multipartite_sep_to_locc_star([(e, e, e)], ((2, 2),) * 3)
        assert m.choi.distance(kraus_to_choi([np.eye(8)])) <= 1e-10

    def test_single_party(self):
        with pytest.raises(ValueError):
            multipartite_sep_to_locc_star([(np.eye(4),)], ((2, 2),))


class TestNoSignaling:
    def test_one_way(self):
        cc = one_way_map().cc
        assert check_no_signaling(cc, [("A", "B")])
        assert not check_no_signaling(cc, [("B", "A")])

    def test_loop(self):
        cc = CcStar.loop((0, 1), (0, 1))
        assert not check_no_signaling(cc, [("A", "B")])
        assert not check_no_signaling(cc, [("B", "A")])

    def test_product_table_any_order(self):
        table = {((i, j), (a, b)): 0.25 for i, j, a, b in itertools.product((0, 1), repeat=4)}
        cc = CcStar(("A", "B"), [(0, 1)] * 2, [(0, 1)] * 2, table)
        assert check_no_signaling(cc, [])

    def test_gamma_every_order(self):
        cc = gamma_cc_star()
        for perm in itertools.permutations("ABC"):
            assert not check_no_signaling(cc, list(zip(perm, perm[1:])))

    def test_cyclic_order_rejected(self):
        with pytest.raises(ValueError):
            check_no_signaling(CcStar.loop((0,), (0,)), [("A", "B"), ("B", "A")])

    def test_lab_slots_must_be_ordered(self):
        cc = CcStar.ring((0, 1), 3)
        with pytest.raises(ValueError):
            check_no_signaling(cc, [], labs={"P1": "L", "P2": "L", "P3": "M"})


class TestProcessMatrices:
    def test_one_way_valid(self):
        rep = validate_process_matrix(one_way_process(), battery=50)
        assert rep.max_deviation <= 1e-9 and rep.spanning_complete and rep.positive

    def test_b8_valid(self):
        rep = validate_process_matrix(b8_process_matrix(), battery=50)
        assert rep.spanning_complete
        assert rep.max_deviation <= 1e-9

    def test_scaled_identity_invalid(self):
        w = ProcessMatrix(2 * np.eye(16) / 4, ((2, 2), (2, 2)))
        assert_allclose(validate_process_matrix(w, battery=10).max_deviation, 1.0, atol=1e-12)

    def test_spanning_set_is_cptp(self):
        for m in cptp_spanning_set(2, 3):
            red = m.reshape(2, 3, 2, 3).trace(axis1=1, axis2=3)
            assert_allclose(red, np.eye(2), atol=1e-12)
            assert np.linalg.eigvalsh(m).min() >= -1e-12

    def test_spanning_set_dimension(self):
        pts = cptp_spanning_set(2, 2)
        vecs = np.array([(p - pts[0]).ravel() for p in pts[1:]])
        # affine hull of {M >= 0 : tr_out M = I} has real dimension din^2 (dout^2 - 1)
        real = np.concatenate([vecs.real, vecs.imag], axis=1)
        assert np.linalg.matrix_rank(real, tol=1e-9) == 4 * 3

    def test_random_cptp(self, rng):
        m = random_cptp_choi(3, 2, rng)
        assert_allclose(m.reshape(3, 2, 3, 2).trace(axis1=1, axis2=3), np.eye(3), atol=1e-12)


class TestClassicalProcess:
    def test_one_way_table(self):
        cc = cc_star_from_classical_process(one_way_process())
        for (i, o), p in cc.table.items():
            assert i[1] == o[0] and p == 0.5
        assert len(cc.table) == 8

    def test_b8_is_gamma_table(self):
        cc = cc_star_from_classical_process(b8_process_matrix())
        assert len(cc.table) == 16 and set(cc.table.values()) == {0.5}
        assert cc.table == gamma_cc_star().table

    def test_uniform_diagonal_invalid(self):
        with pytest.raises(NormalizationError) as err:
            cc_star_from_classical_process(ProcessMatrix(np.eye(16) / 2, ((2, 2), (2, 2))))
        assert err.value.defect > 0.5

    def test_non_diagonal_rejected(self):
        w = np.eye(4) / 2
        w[0, 1] = w[1, 0] = 0.1
        with pytest.raises(ValueError):
            cc_star_from_classical_process(ProcessMatrix(w, ((2, 1), (2, 1))))


class TestGamma:
    def test_weights(self):
        cc = gamma_cc_star()
        assert cc.p((0, 0, 0), (0, 0, 0)) == 0.5
        assert len(cc.table) == 16

    def test_expansion_and_tp(self):
        rep = tripartite_gamma()
        assert rep.expansion_distance <= 1e-12
        assert rep.map.tp and rep.map.cp

    def test_sep(self):
        dims = ((2, 4),) * 3
        assert sep_choi(gamma_sep_terms(), dims).distance(tripartite_gamma().choi) <= 1e-12

    def test_action_on_product_input(self):
        # each term projects the inputs; the joint input weight sums to one
        m = tripartite_gamma().map
        rho = np.outer(v := random_state(8, np.random.default_rng(3)), v.conj())
        assert_allclose(np.trace(m.apply(rho)).real, 1.0, atol=1e-12)


class TestLemma3:
    def test_accepts_canonical(self):
        assert lemma3_structure_check(gamma_sep_terms())

    def test_rejects_mixed_triple(self):
        t = gamma_sep_terms()
        bad = [(t[0][0], t[1][1], t[0][2])] + t[1:]
        assert not lemma3_structure_check(bad)

    def test_accepts_rescaled(self):
        t = gamma_sep_terms()
        scaled = list(t)
        scaled[2] = (2 * t[2][0], t[2][1], t[2][2] / 2)
        assert lemma3_structure_check(scaled)

    def test_rejects_noise(self, rng):
        t = list(gamma_sep_terms())
        n = rng.normal(size=(8, 8))
        t[5] = (t[5][0] + 1e-3 * (n + n.T), t[5][1], t[5][2])
        assert not lemma3_structure_check(t)

    def test_triples_are_distinct(self):
        assert len(set(gamma_triples())) == 16
        assert_allclose(np.trace(bold_projector(3)), 1.0)


class TestCcStarJson:
    def test_round_trip_tuple_labels(self):
        loop = to_loop_form(one_way_map())
        back = CcStar.from_json(json.loads(json.dumps(loop.cc.to_json())))
        assert back.table == loop.cc.table
        assert back.in_alphabets == loop.cc.in_alphabets

    def test_round_trip_gamma(self):
        cc = gamma_cc_star()
        assert CcStar.from_json(cc.to_json()).table == cc.table

    def test_label_outside_alphabet(self):
        with pytest.raises(AlphabetError):
            CcStar(("A", "B"), [(0,), (0,)], [(0,), (0,)], {((0, 2), (0, 0)): 1.0})

    def test_unnormalized(self):
        with pytest.raises(NormalizationError):
            CcStar(("A",), [(0, 1)], [(0,)], {((0,), (0,)): 0.7})

    def test_negative_entry(self):
        with pytest.raises(NormalizationError):
            CcStar(("A",), [(0, 1)], [(0,)], {((0,), (0,)): 1.5, ((1,), (0,)): -0.5})

    def test_dense(self):
        t = CcStar.loop((0, 1), (0, 1, 2)).dense()
        assert t.shape == (3, 2, 2, 3)
        assert_allclose(t.sum(axis=(0, 1)), np.ones((2, 3)))
