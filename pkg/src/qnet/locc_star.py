"""LOCC*, classical communication without predefined order, and process matrices.

A joint map is ``M = sum p(i_1..i_N | o_1..o_N) A^(1)_{o_1|i_1} (x) ... (x) A^(N)_{o_N|i_N}``
where ``A^(n)_{o|i}`` are the CJ operators of party ``n``'s instrument. Assembled
CJ operators are returned in the ``(in_1..in_N) (x) (out_1..out_N)`` order used by
``choi_tensor``. Process matrices use the per-party ``(I_1, O_1, I_2, O_2, ...)``
factor order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .linalg import TOL, H, I2, as_matrix, kron, partial_trace, permute_subsystems, random_unitary
from .ops import ChoiOperator, QuantumInstrument, choi_to_kraus, kraus_to_choi

NORMALIZATION_TOL = 1e-12


class AlphabetError(ValueError):
    """Instrument labels and the CC* alphabets disagree."""


class NormalizationError(ValueError):
    """A conditional probability table does not normalize."""

    def __init__(self, message: str, defect: float):
        super().__init__(message)
        self.defect = defect


def _label(x):
    return tuple(_label(y) for y in x) if isinstance(x, list) else x


def _json_label(x):
    return [_json_label(y) for y in x] if isinstance(x, tuple) else x


@dataclass
class CcStar:
    """Conditional table ``p(inputs | outputs)`` linking parties' classical labels.

    ``table`` maps ``(inputs, outputs)`` tuples (one label per party) to a
    probability; absent keys are zero.
    """

    parties: tuple
    in_alphabets: tuple
    out_alphabets: tuple
    table: dict = field(default_factory=dict)
    validate: bool = True

    def __post_init__(self):
        self.parties = tuple(self.parties)
        self.in_alphabets = tuple(tuple(a) for a in self.in_alphabets)
        self.out_alphabets = tuple(tuple(a) for a in self.out_alphabets)
        n = len(self.parties)
        if len(self.in_alphabets) != n or len(self.out_alphabets) != n:
            raise AlphabetError("one input and one output alphabet per party")
        self.table = {(tuple(i), tuple(o)): float(p) for (i, o), p in self.table.items() if p != 0}
        if self.validate:
            self.check()

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    def p(self, inputs, outputs) -> float:
        return self.table.get((tuple(inputs), tuple(outputs)), 0.0)

    def normalization_defect(self) -> float:
        sums: dict = {}
        for (_, o), p in self.table.items():
            sums[o] = sums.get(o, 0.0) + p
        worst = 0.0
        for o in product(*self.out_alphabets):
            worst = max(worst, abs(sums.get(o, 0.0) - 1.0))
        return worst

    def check(self) -> None:
        ins = [set(a) for a in self.in_alphabets]
        outs = [set(a) for a in self.out_alphabets]
        for (i, o), p in self.table.items():
            if len(i) != self.n_parties or len(o) != self.n_parties:
                raise AlphabetError(f"entry {(i, o)} has the wrong number of labels")
            if any(x not in a for x, a in zip(i, ins)) or any(x not in a for x, a in zip(o, outs)):
                raise AlphabetError(f"entry {(i, o)} uses a label outside the alphabets")
            if p < -NORMALIZATION_TOL:
                raise NormalizationError(f"negative entry {p} at {(i, o)}", -p)
        defect = self.normalization_defect()
        if defect > NORMALIZATION_TOL:
            raise NormalizationError(f"sum over inputs deviates from 1 by {defect:.3e}", defect)

    def dense(self) -> np.ndarray:
        """Array indexed ``[i_1, .., i_N, o_1, .., o_N]`` in alphabet order."""
        shape = [len(a) for a in self.in_alphabets] + [len(a) for a in self.out_alphabets]
        if np.prod(shape) > 10**7:
            raise ValueError("table too large for a dense view")
        t = np.zeros(shape)
        ipos = [{x: k for k, x in enumerate(a)} for a in self.in_alphabets]
        opos = [{x: k for k, x in enumerate(a)} for a in self.out_alphabets]
        for (i, o), p in self.table.items():
            t[tuple(m[x] for m, x in zip(ipos, i)) + tuple(m[x] for m, x in zip(opos, o))] = p
        return t

    @classmethod
    def loop(cls, alphabet_a, alphabet_b, parties=("A", "B")) -> "CcStar":
        """``p = delta(i_A, o_B) delta(i_B, o_A)``: A outputs ``alphabet_a``, B outputs ``alphabet_b``."""
        table = {((b, a), (a, b)): 1.0 for a in alphabet_a for b in alphabet_b}
        return cls(parties, (alphabet_b, alphabet_a), (alphabet_a, alphabet_b), table)

    @classmethod
    def ring(cls, alphabet, n: int, parties=None) -> "CcStar":
        """``p = prod_n delta(i_n, o_{n-1})`` with indices mod ``n``."""
        alphabet = tuple(alphabet)
        parties = parties or tuple(f"P{k + 1}" for k in range(n))
        table = {(o[-1:] + o[:-1], o): 1.0 for o in product(alphabet, repeat=n)}
        return cls(parties, (alphabet,) * n, (alphabet,) * n, table)

    def to_json(self) -> dict:
        return {
            "parties": list(self.parties),
            "alphabets": {
                "inputs": [[_json_label(x) for x in a] for a in self.in_alphabets],
                "outputs": [[_json_label(x) for x in a] for a in self.out_alphabets],
            },
            "entries": [
                {"inputs": [_json_label(x) for x in i], "outputs": [_json_label(x) for x in o], "p": p}
                for (i, o), p in self.table.items()
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CcStar":
        alph = obj["alphabets"]
        table = {}
        for e in obj["entries"]:
            key = (tuple(_label(x) for x in e["inputs"]), tuple(_label(x) for x in e["outputs"]))
            table[key] = table.get(key, 0.0) + float(e["p"])
        return cls(
            tuple(obj["parties"]),
            [[_label(x) for x in a] for a in alph["inputs"]],
            [[_label(x) for x in a] for a in alph["outputs"]],
            table,
        )


# ---------------------------------------------------------------------------
# Assembly


def _reorder_in_out(m: np.ndarray, ins: Sequence[int], outs: Sequence[int]) -> np.ndarray:
    """Per-party ``(in_1, out_1, in_2, ..)`` order to ``(in_1, in_2, .., out_1, ..)``."""
    n = len(ins)
    dims = [d for pair in zip(ins, outs) for d in pair]
    perm = [2 * j for j in range(n)] + [2 * j + 1 for j in range(n)]
    return permute_subsystems(m, dims, perm)


def _element_cj(inst: QuantumInstrument, i, o) -> np.ndarray | None:
    ks = inst.elements.get(i, {}).get(o)
    if not ks:
        return None
    return kraus_to_choi(ks, inst.in_dim).matrix


@dataclass
class LoccStarMap:
    instruments: tuple
    cc: CcStar
    choi: ChoiOperator
    cp: bool
    tp: bool
    trace_defect: float

    @property
    def in_dims(self) -> tuple:
        return tuple(inst.in_dim for inst in self.instruments)

    @property
    def out_dims(self) -> tuple:
        return tuple(inst.out_dim for inst in self.instruments)

    def apply(self, rho) -> np.ndarray:
        return self.choi.apply(rho)

    def completeness_defects(self) -> list[float]:
        return [max(inst.completeness_defect(i) for i in inst.inputs) for inst in self.instruments]

    def summary(self) -> dict:
        return {
            "parties": list(self.cc.parties),
            "in_dims": list(self.in_dims),
            "out_dims": list(self.out_dims),
            "cp": self.cp,
            "tp": self.tp,
            "trace_defect": self.trace_defect,
            "max_completeness_defect": max(self.completeness_defects()),
        }


def assemble_locc_star(instruments: Sequence[QuantumInstrument], cc: CcStar) -> LoccStarMap:
    """Joint CJ ``sum p(i|o) (x)_n A^(n)_{o_n|i_n}``; CP always, TP reported."""
    instruments = tuple(instruments)
    if len(instruments) != cc.n_parties:
        raise AlphabetError(f"{len(instruments)} instruments for {cc.n_parties} parties")
    for n, inst in enumerate(instruments):
        if set(inst.inputs) != set(cc.in_alphabets[n]):
            raise AlphabetError(f"party {cc.parties[n]!r}: instrument inputs do not match the CC* input alphabet")
        outs = {o for i in inst.inputs for o in inst.outcomes(i)}
        if not outs <= set(cc.out_alphabets[n]):
            raise AlphabetError(f"party {cc.parties[n]!r}: instrument outcomes outside the CC* output alphabet")
    ins = [inst.in_dim for inst in instruments]
    outs = [inst.out_dim for inst in instruments]
    dim = int(np.prod(ins) * np.prod(outs))
    total = np.zeros((dim, dim), dtype=complex)
    cache: dict = {}
    for (i, o), p in cc.table.items():
        factors = []
        for n, inst in enumerate(instruments):
            key = (n, i[n], o[n])
            if key not in cache:
                cache[key] = _element_cj(inst, i[n], o[n])
            if cache[key] is None:
                break
            factors.append(cache[key])
        else:
            total += p * kron(*factors)
    choi = ChoiOperator(_reorder_in_out(total, ins, outs), int(np.prod(ins)), int(np.prod(outs)))
    defect = choi.trace_defect()
    return LoccStarMap(instruments, cc, choi, choi.is_cp(), defect <= TOL.equality, defect)


def to_loop_form(m: LoccStarMap) -> LoccStarMap:
    """Rewrite a two-party LOCC* map with ``p = delta(i_A, o_B) delta(i_B, o_A)``.

    New labels: Alice reads ``(o_A, o_B)`` and emits ``(i_B, x)``; Bob reads
    ``(i_B, x)`` and emits ``(o_A, o_B)``.
    """
    if m.cc.n_parties != 2:
        raise ValueError("the loop form is defined for two parties")
    a_inst, b_inst = m.instruments
    cc = m.cc
    in_a, in_b = cc.in_alphabets
    out_a, out_b = cc.out_alphabets
    b_labels = tuple(product(out_a, out_b))
    xs = tuple(dict.fromkeys(o for i in a_inst.inputs for o in a_inst.outcomes(i)))
    a_labels = tuple(product(in_b, xs))
    a_new: dict = {}
    for oa, ob in b_labels:
        row = {}
        for ib, x in a_labels:
            ks = []
            for ia in in_a:
                p = cc.p((ia, ib), (oa, ob))
                if p > 0:
                    ks += [np.sqrt(p) * k for k in a_inst.elements[ia].get(x, [])]
            if ks:
                row[(ib, x)] = ks
        a_new[(oa, ob)] = row
    b_new: dict = {}
    for ib, x in a_labels:
        b_new[(ib, x)] = {(x, ob): ks for ob, ks in b_inst.elements[ib].items()}
    a2 = QuantumInstrument(a_inst.in_dim, a_inst.out_dim, a_new)
    b2 = QuantumInstrument(b_inst.in_dim, b_inst.out_dim, b_new)
    return assemble_locc_star([a2, b2], CcStar.loop(a_labels, b_labels, cc.parties))


# ---------------------------------------------------------------------------
# SEP -> LOCC*


def _as_cj(e, in_dim: int, out_dim: int) -> np.ndarray:
    if isinstance(e, ChoiOperator):
        return e.matrix
    return as_matrix(e, in_dim * out_dim, in_dim * out_dim)


def _tr_out(m: np.ndarray, din: int, dout: int) -> np.ndarray:
    return partial_trace(m, [din, dout], [0])


def _instrument_from_cj(in_dim: int, out_dim: int, cjs: dict) -> QuantumInstrument:
    elements = {}
    for i, row in cjs.items():
        elements[i] = {}
        for o, m in row.items():
            ks = choi_to_kraus(ChoiOperator(m, in_dim, out_dim))
            if ks:
                elements[i][o] = ks
    return QuantumInstrument(in_dim, out_dim, elements)


def _sep_terms(terms, dims) -> list[list[np.ndarray]]:
    out = []
    for t in terms:
        if len(t) != len(dims):
            raise ValueError("every SEP term needs one factor per party")
        out.append([_as_cj(e, di, do) for e, (di, do) in zip(t, dims)])
    return out


def sep_choi(terms, dims) -> ChoiOperator:
    """CJ of ``sum_k (x)_n E_k^(n)`` in ins-then-outs order."""
    terms = _sep_terms(terms, dims)
    ins = [d[0] for d in dims]
    outs = [d[1] for d in dims]
    total = sum(kron(*t) for t in terms)
    return ChoiOperator(_reorder_in_out(total, ins, outs), int(np.prod(ins)), int(np.prod(outs)))


def _rescale(terms, dims) -> list[list[np.ndarray]]:
    """Move weight onto party 0 so that ``tr_out E_k^(n) <= I`` for every factor."""
    scaled = []
    for t in terms:
        lams = [float(np.linalg.eigvalsh(_tr_out(e, *d)).max()) for e, d in zip(t[1:], dims[1:])]
        if min(lams, default=1.0) <= TOL.kraus_floor or np.linalg.norm(t[0]) <= TOL.kraus_floor:
            continue
        scaled.append([t[0] * float(np.prod(lams))] + [e / lam for e, lam in zip(t[1:], lams)])
    return scaled


def _check_sep_tp(terms, dims) -> None:
    c = sep_choi(terms, dims)
    if not c.is_tp():
        raise ValueError(f"SEP input is not trace preserving: trace defect {c.trace_defect():.3e}")


def _random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_sep_terms(dims, rng: np.random.Generator, outcomes: int = 3) -> list[tuple[np.ndarray, np.ndarray]]:
    """CJ factor pairs of a random TP bipartite SEP map.

    A convex mixture of an Alice-first and a Bob-first one-round protocol:
    one party applies a random instrument and the other a random channel
    chosen by the outcome.
    """
    dims = tuple(tuple(d) for d in dims)
    w = float(rng.uniform(0.2, 0.8))
    terms = []
    for first, weight in ((0, w), (1, 1 - w)):
        di, do = dims[first]
        ei, eo = dims[1 - first]
        n_out = max(outcomes, -(-di // do))
        v = _random_isometry(n_out * do, di, rng)
        for o in range(n_out):
            ko = v[o * do : (o + 1) * do]
            u = _random_isometry(max(2, -(-ei // eo)) * eo, ei, rng)
            chan = kraus_to_choi([u[j * eo : (j + 1) * eo] for j in range(u.shape[0] // eo)], ei).matrix
            pair = [weight * kraus_to_choi([ko], di).matrix, chan]
            terms.append(tuple(pair) if first == 0 else (pair[1], pair[0]))
    return terms


def sep_to_locc_star(terms, dims) -> LoccStarMap:
    """Loop-form LOCC* map equal to the two-party SEP map ``sum_k E_k^A (x) E_k^B``.

    ``terms`` is a list of ``(E_k^A, E_k^B)`` CJ matrices and ``dims`` gives
    ``((in_A, out_A), (in_B, out_B))``. Labels run over ``1..L+3``.
    """
    dims = tuple(tuple(d) for d in dims)
    if len(dims) != 2:
        raise ValueError("sep_to_locc_star is bipartite; use multipartite_sep_to_locc_star")
    terms = _sep_terms(terms, dims)
    _check_sep_tp(terms, dims)
    terms = _rescale(terms, dims)
    L = len(terms)
    labels = tuple(range(1, L + 4))
    fixed = [np.eye(di * do) / do for di, do in dims]
    cjs = [{b: {} for b in labels}, {a: {} for a in labels}]
    for k, t in enumerate(terms, start=1):
        for n, (di, do) in enumerate(dims):
            cjs[n][k][k] = t[n]
            rest = np.eye(di) - _tr_out(t[n], di, do)
            cjs[n][k][L + 1] = np.kron(rest, np.eye(do) / do)
    # Failure track: Alice needs a + b odd, Bob needs a + b even, so no loop closes.
    for b in (L + 1, L + 2, L + 3):
        a = next(a for a in (L + 2, L + 3) if (a + b) % 2 == 1)
        cjs[0][b][a] = fixed[0]
    for a in (L + 1, L + 2, L + 3):
        b = next(b for b in (L + 2, L + 3) if (a + b) % 2 == 0)
        cjs[1][a][b] = fixed[1]
    insts = [_instrument_from_cj(di, do, c) for (di, do), c in zip(dims, cjs)]
    return assemble_locc_star(insts, CcStar.loop(labels, labels))


def multipartite_sep_to_locc_star(terms, dims) -> LoccStarMap:
    """LOCC* map on a ring ``p = prod_n delta(i_n, o_{n-1})`` equal to an N-party SEP map.

    Party ``n`` forwards ``l`` with ``E_l^(n)`` or a failure flag ``L+1``.
    Failures then circulate as a parity bit (labels ``L+2``, ``L+3``) that
    party 1 flips and the others copy, so no consistent ring assignment
    contains a failure.
    """
    dims = tuple(tuple(d) for d in dims)
    n = len(dims)
    if n < 2:
        raise ValueError("need at least two parties")
    terms = _sep_terms(terms, dims)
    _check_sep_tp(terms, dims)
    terms = _rescale(terms, dims)
    L = len(terms)
    fail, par = L + 1, (L + 2, L + 3)
    labels = tuple(range(1, L + 4))
    cjs = []
    for p, (di, do) in enumerate(dims):
        flip = 1 if p == 0 else 0
        fixed = np.eye(di * do) / do
        c = {x: {} for x in labels}
        for k, t in enumerate(terms, start=1):
            c[k][k] = t[p]
            c[k][fail] = np.kron(np.eye(di) - _tr_out(t[p], di, do), np.eye(do) / do)
        c[fail][par[flip]] = fixed
        for bit in (0, 1):
            c[par[bit]][par[bit ^ flip]] = fixed
        cjs.append(c)
    insts = [_instrument_from_cj(di, do, c) for (di, do), c in zip(dims, cjs)]
    return assemble_locc_star(insts, CcStar.ring(labels, n))


# ---------------------------------------------------------------------------
# Nine-state map


def _k(j: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[j] = 1
    return v


def _sup(terms: dict, d: int = 3) -> np.ndarray:
    v = sum(c * _k(j, d) for j, c in terms.items())
    return v / np.linalg.norm(v)


NINE_STATE_FACTORS = (
    ({0: 1}, {0: 1, 1: 1}),
    ({0: 1}, {0: 1, 1: -1}),
    ({0: 1, 1: 1}, {2: 1}),
    ({0: 1, 1: -1}, {2: 1}),
    ({2: 1}, {1: 1, 2: 1}),
    ({2: 1}, {1: 1, 2: -1}),
    ({1: 1, 2: 1}, {0: 1}),
    ({1: 1, 2: -1}, {0: 1}),
    ({1: 1}, {1: 1}),
)

# (row a, column b) -> (output label, bra) in the tables of Kraus operators.
NINE_TABLE_A = {
    (1, 1): (1, {0: 1}), (1, 2): (2, {0: 1}), (1, 3): (3, {0: 1, 1: 1}),
    (2, 1): (8, {1: 1, 2: -1}), (2, 2): (9, {1: 1}), (2, 3): (4, {0: 1, 1: -1}),
    (3, 1): (7, {1: 1, 2: 1}), (3, 2): (6, {2: 1}), (3, 3): (5, {2: 1}),
}
NINE_TABLE_B = {
    (1, 1): (1, {0: 1, 1: 1}), (1, 2): (2, {0: 1, 1: -1}), (1, 3): (3, {2: 1}),
    (2, 1): (8, {0: 1}), (2, 2): (9, {1: 1}), (2, 3): (4, {2: 1}),
    (3, 1): (7, {0: 1}), (3, 2): (6, {1: 1, 2: -1}), (3, 3): (5, {1: 1, 2: 1}),
}


def nine_state_vectors() -> list[np.ndarray]:
    return [np.kron(_sup(a), _sup(b)) for a, b in NINE_STATE_FACTORS]


def nine_state_table_map() -> LoccStarMap:
    """Loop-form LOCC* map sending the ``k``-th nine state to ``|k> (x) |k>``.

    Output registers are 9-dimensional with label ``k`` stored at index ``k-1``.
    """
    a_el: dict = {b: {} for b in (1, 2, 3)}
    b_el: dict = {a: {} for a in (1, 2, 3)}
    for (a, b), (lab, bra) in NINE_TABLE_A.items():
        a_el[b][a] = [np.outer(_k(lab - 1, 9), _sup(bra).conj())]
    for (a, b), (lab, bra) in NINE_TABLE_B.items():
        b_el[a][b] = [np.outer(_k(lab - 1, 9), _sup(bra).conj())]
    a_inst = QuantumInstrument(3, 9, a_el)
    b_inst = QuantumInstrument(3, 9, b_el)
    return assemble_locc_star([a_inst, b_inst], CcStar.loop((1, 2, 3), (1, 2, 3)))


def nine_state_sep_terms() -> list[tuple[np.ndarray, np.ndarray]]:
    """CJ factors of the SEP map with Kraus ``|k>|k><psi_k|``."""
    out = []
    for k, (a, b) in enumerate(NINE_STATE_FACTORS):
        ka = np.outer(_k(k, 9), _sup(a).conj())
        kb = np.outer(_k(k, 9), _sup(b).conj())
        out.append((kraus_to_choi([ka]).matrix, kraus_to_choi([kb]).matrix))
    return out


# ---------------------------------------------------------------------------
# No-signaling


def _closure(nodes: list, order) -> set:
    rel = set()
    for u, v in order:
        if u not in nodes or v not in nodes:
            raise ValueError(f"order mentions unknown slot in {(u, v)!r}")
        rel.add((u, v))
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in product(list(rel), list(rel)):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    if any(a == b for a, b in rel):
        raise ValueError("order is not a strict partial order")
    return rel


def check_no_signaling(cc: CcStar, order, labs: dict | None = None, tol: float = NORMALIZATION_TOL) -> bool:
    """Whether ``p`` respects the strict partial order ``order`` over slots.

    ``order`` is a collection of ``(u, v)`` pairs meaning ``u`` precedes ``v``;
    slots are the CC* parties. ``labs`` optionally maps slots to laboratories;
    slots of one lab must then be totally ordered in listing order. For every
    set of inputs closed under earlier slots of the same lab, the marginal must
    not depend on outputs outside its past.
    """
    slots = list(cc.parties)
    rel = _closure(slots, order)
    labs = labs or {s: s for s in slots}
    groups: dict = {}
    for s in slots:
        groups.setdefault(labs[s], []).append(s)
    for g in groups.values():
        for a, b in zip(g, g[1:]):
            if (a, b) not in rel:
                raise ValueError(f"slots {a!r} and {b!r} of one lab are not ordered")
    t = cc.dense()
    n = len(slots)
    prefixes = [[tuple(g[:k]) for k in range(len(g) + 1)] for g in groups.values()]
    for choice in product(*prefixes):
        chosen = [s for part in choice for s in part]
        if not chosen:
            continue
        keep = {slots.index(s) for s in chosen}
        marg = t.sum(axis=tuple(j for j in range(n) if j not in keep))
        past = {j for j, s in enumerate(slots) if any((s, c) in rel for c in chosen)}
        free = tuple(len(keep) + j for j in range(n) if j not in past)
        if free:
            mean = marg.mean(axis=free, keepdims=True)
            if np.abs(marg - mean).max() > tol:
                return False
    return True


# ---------------------------------------------------------------------------
# Process matrices


@dataclass(frozen=True)
class ProcessMatrix:
    """``W`` on ``(I_1, O_1, I_2, O_2, ..)`` with ``dims = ((dI_1, dO_1), ..)``."""

    matrix: np.ndarray
    dims: tuple

    def __post_init__(self):
        dims = tuple(tuple(d) for d in self.dims)
        size = int(np.prod([a * b for a, b in dims]))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", as_matrix(self.matrix, size, size))

    @property
    def classical(self) -> bool:
        m = self.matrix
        return bool(np.abs(m - np.diag(np.diag(m))).max() <= 1e-12)

    def is_positive(self, tol: float = 1e-10) -> bool:
        return float(np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2).min()) >= -tol

    def evaluate(self, chois: Sequence[np.ndarray]) -> complex:
        """``tr[W (M_1^T (x) M_2^T (x) ..)]`` for party CJ matrices ``M_n``."""
        return complex(np.sum(self.matrix * kron(*chois)))


def random_cptp_choi(din: int, dout: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = rank or din * dout
    g = rng.standard_normal((dout * rank, din)) + 1j * rng.standard_normal((dout * rank, din))
    q, _ = np.linalg.qr(g)
    ks = [q[r * dout : (r + 1) * dout] for r in range(rank)]
    return kraus_to_choi(ks, din).matrix


def _hermitian_basis(d: int) -> list[np.ndarray]:
    out = [np.eye(d, dtype=complex)]
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = e[k, j] = 1
            out.append(e)
            f = np.zeros((d, d), dtype=complex)
            f[j, k], f[k, j] = -1j, 1j
            out.append(f)
    for j in range(1, d):
        out.append(np.diag([1.0] * j + [-float(j)] + [0.0] * (d - j - 1)).astype(complex))
    return out


def cptp_spanning_set(din: int, dout: int) -> list[np.ndarray]:
    """CPTP CJ matrices whose affine hull is every ``M`` with ``tr_out M = I``."""
    base = np.eye(din * dout, dtype=complex) / dout
    pts = [base]
    for f in _hermitian_basis(din):
        for t in _hermitian_basis(dout)[1:]:
            g = np.kron(f, t)
            eps = 0.5 / (dout * np.linalg.norm(g, 2))
            pts.append(base + eps * g)
    return pts


def _extreme_points(din: int, dout: int, rng: np.random.Generator, count: int) -> list[np.ndarray]:
    out = []
    for _ in range(count):
        if din == dout:
            out.append(kraus_to_choi([random_unitary(din, rng)]).matrix)
        v = random_unitary(dout, rng)[:, 0]
        out.append(np.kron(np.eye(din), np.outer(v, v.conj())))
    return out


@dataclass
class ProcessReport:
    max_deviation: float
    n_evaluated: int
    spanning_complete: bool
    positive: bool

    def to_json(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "n_evaluated": self.n_evaluated,
            "spanning_complete": self.spanning_complete,
            "positive": self.positive,
        }


def validate_process_matrix(
    w: ProcessMatrix, battery: int = 200, seed: int = 0, spanning_limit: int = 20000
) -> ProcessReport:
    """Max ``|tr[W (x) M_n^T] - 1|`` over random CPTP CJs, extreme points and a spanning set.

    The functional is affine in each ``M_n``, so agreement on all products of the
    per-party spanning sets proves validity; that part is skipped (and flagged)
    when the product count exceeds ``spanning_limit``.
    """
    rng = np.random.default_rng(seed)
    worst, count = 0.0, 0

    def check(ms):
        nonlocal worst, count
        val = w.evaluate(ms)
        worst = max(worst, abs(val - 1))
        count += 1

    for _ in range(battery):
        check([random_cptp_choi(di, do, rng) for di, do in w.dims])
    ext = [_extreme_points(di, do, rng, 4) for di, do in w.dims]
    for _ in range(battery):
        check([e[rng.integers(len(e))] for e in ext])
    spans = [cptp_spanning_set(di, do) for di, do in w.dims]
    n_span = int(np.prod([len(s) for s in spans]))
    complete = n_span <= spanning_limit
    if complete:
        for ms in product(*spans):
            check(list(ms))
    return ProcessReport(float(worst), count, complete, w.is_positive())


def one_way_process(d: int = 2, d_out_b: int = 2) -> ProcessMatrix:
    """Perfect classical channel ``O_A -> I_B``, maximally mixed ``I_A``, identity on ``O_B``."""
    chan = sum(np.kron(np.outer(_k(j, d), _k(j, d)), np.outer(_k(j, d), _k(j, d))) for j in range(d))
    w = np.kron(np.kron(np.eye(d) / d, chan), np.eye(d_out_b))
    return ProcessMatrix(w, ((d, d), (d, d_out_b)))


def b8_process_matrix() -> ProcessMatrix:
    """Classical tripartite process on qubits ``7..12`` = ``(I_A, O_A, I_B, O_B, I_C, O_C)``."""

    def zs(*sites):
        return kron(*[np.diag([1.0, -1.0]) if q in sites else I2 for q in range(7, 13)])

    w = (np.eye(64) + zs(7, 10, 11, 12) + zs(7, 8, 9, 12) + zs(8, 9, 10, 11)) / 8
    return ProcessMatrix(w, ((2, 2),) * 3)


def cc_star_from_classical_process(w: ProcessMatrix, parties=None) -> CcStar:
    """``p(i_1..i_N | o_1..o_N) = w(i_1, o_1, ..)`` for a diagonal ``W``."""
    if not w.classical:
        raise ValueError("process matrix is not diagonal in the computational basis")
    dims = [d for pair in w.dims for d in pair]
    diag = np.real(np.diag(w.matrix)).reshape(dims)
    n = len(w.dims)
    parties = parties or tuple("ABCDEFGH"[j] if n <= 8 else f"P{j + 1}" for j in range(n))
    table = {}
    for idx in product(*[range(d) for d in dims]):
        val = float(diag[idx])
        if abs(val) > 1e-15:
            table[(idx[0::2], idx[1::2])] = val
    return CcStar(
        parties,
        [tuple(range(di)) for di, _ in w.dims],
        [tuple(range(do)) for _, do in w.dims],
        table,
    )


# ---------------------------------------------------------------------------
# Tripartite separable map that is not LOCC

_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
_Q = {"0": _k(0, 2), "1": _k(1, 2), "+": _PLUS, "-": _MINUS}

BOLD_BASIS = ("000", "101", "+10", "-11", "100", "001", "-10", "+11")
GAMMA_TABLE = (
    "000000", "000111", "001010", "001101", "010011", "010100", "011001", "011110",
    "100001", "100110", "101011", "101100", "110010", "110101", "111000", "111111",
)


def bold_state(k: int) -> np.ndarray:
    """``|k>`` on (input qubit, two output qubits)."""
    return kron(*[_Q[c] for c in BOLD_BASIS[k]])


def bold_projector(k: int) -> np.ndarray:
    v = bold_state(k)
    return np.outer(v, v.conj())


def gamma_instrument_cj(a: int, x: int) -> np.ndarray:
    """``A_{a|x} = H^x |a><a| H^x (x) |x a><x a|`` on (input qubit, output pair)."""
    h = H if x else I2
    v = h @ _k(a, 2)
    return np.kron(np.outer(v, v.conj()), np.outer(_k(2 * x + a, 4), _k(2 * x + a, 4)))


def gamma_cc_star() -> CcStar:
    table = {}
    for row in GAMMA_TABLE:
        x, y, z, a, b, c = map(int, row)
        table[((x, y, z), (a, b, c))] = 0.5
    return CcStar(("A", "B", "C"), [(0, 1)] * 3, [(0, 1)] * 3, table)


def gamma_triples() -> list[tuple[int, int, int]]:
    """Bold-basis labels of the 16 product projectors (each with weight 1/2)."""
    out = []
    for row in GAMMA_TABLE:
        x, y, z, a, b, c = map(int, row)
        out.append((2 * x + a, 2 * y + b, 2 * z + c))
    return out


def gamma_expansion() -> np.ndarray:
    """``1/2 sum [k_A k_B k_C]`` in per-party order."""
    return 0.5 * sum(kron(*[bold_projector(k) for k in t]) for t in gamma_triples())


@dataclass
class GammaReport:
    map: LoccStarMap
    expansion_distance: float

    @property
    def choi(self) -> ChoiOperator:
        return self.map.choi


def tripartite_gamma() -> GammaReport:
    """Assemble ``Gamma`` from the three local instruments and the CC* table."""
    el = {x: {a: choi_to_kraus(ChoiOperator(gamma_instrument_cj(a, x), 2, 4)) for a in (0, 1)} for x in (0, 1)}
    inst = QuantumInstrument(2, 4, el)
    m = assemble_locc_star([inst, inst, inst], gamma_cc_star())
    expansion = _reorder_in_out(gamma_expansion(), [2, 2, 2], [4, 4, 4])
    return GammaReport(m, float(np.linalg.norm(m.choi.matrix - expansion)))


def gamma_sep_terms() -> list[tuple[np.ndarray, ...]]:
    return [tuple((0.5 if n == 0 else 1.0) * bold_projector(k) for n, k in enumerate(t)) for t in gamma_triples()]


def _bold_label(f: np.ndarray, tol: float) -> int | None:
    f = as_matrix(f, 8, 8)
    tr = np.trace(f).real
    if tr <= tol:
        return None
    g = f / tr
    for k in range(8):
        if np.linalg.norm(g - bold_projector(k)) <= tol:
            return k
    return None


def lemma3_structure_check(terms, tol: float = 1e-9) -> bool:
    """Whether every term ``(A_i, B_i, C_i)`` is a positive multiple of an allowed projector triple."""
    allowed = set(gamma_triples())
    for t in terms:
        labels = tuple(_bold_label(f, tol) for f in t)
        if None in labels or labels not in allowed:
            return False
    return True


__all__ = [
    "AlphabetError",
    "BOLD_BASIS",
    "CcStar",
    "GAMMA_TABLE",
    "GammaReport",
    "LoccStarMap",
    "NINE_STATE_FACTORS",
    "NormalizationError",
    "ProcessMatrix",
    "ProcessReport",
    "assemble_locc_star",
    "b8_process_matrix",
    "bold_projector",
    "bold_state",
    "cc_star_from_classical_process",
    "check_no_signaling",
    "cptp_spanning_set",
    "gamma_cc_star",
    "gamma_expansion",
    "gamma_instrument_cj",
    "gamma_sep_terms",
    "gamma_triples",
    "lemma3_structure_check",
    "multipartite_sep_to_locc_star",
    "nine_state_sep_terms",
    "nine_state_table_map",
    "nine_state_vectors",
    "one_way_process",
    "random_cptp_choi",
    "sep_choi",
    "sep_to_locc_star",
    "to_loop_form",
    "random_sep_terms",
    "tripartite_gamma",
    "validate_process_matrix",
]
