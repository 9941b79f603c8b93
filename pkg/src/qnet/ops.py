"""States, instruments, Choi-Jamiolkowski operators and dilations.

CJ convention: ``M = sum_{k,l} |k><l| (x) Phi(|k><l|)`` with the input
factor first, and ``Phi(rho) = tr_in[M (rho^T (x) I_out)]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Hashable, Mapping, Sequence

import numpy as np

from .linalg import (
    TOL,
    DimensionError,
    as_matrix,
    dagger,
    eig_hermitian,
    is_hermitian,
    is_psd,
    kron,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    permute_subsystems,
)


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != int(np.prod(self.dims)):
            raise DimensionError("density matrix does not match subsystem dims")
        if not is_hermitian(m, 1e-10):
            raise ValueError("density operator must be Hermitian")
        if float(np.linalg.eigvalsh((m + dagger(m)) / 2).min()) < -1e-10:
            raise ValueError("density operator has a negative eigenvalue")
        if abs(np.trace(m) - 1) > 1e-10:
            raise ValueError("density operator must have unit trace")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_state(cls, psi, dims: Sequence[int] | None = None) -> "DensityOperator":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        return cls(np.outer(psi, psi.conj()), tuple(dims or (psi.size,)))


@dataclass(frozen=True)
class ChoiOperator:
    """CJ matrix on ``H_in (x) H_out``."""

    matrix: np.ndarray
    in_dim: int
    out_dim: int

    def __post_init__(self):
        m = as_matrix(self.matrix, self.in_dim * self.out_dim, self.in_dim * self.out_dim)
        object.__setattr__(self, "matrix", m)

    def is_cp(self, tol: float = 1e-10) -> bool:
        return is_psd(self.matrix, tol)

    def trace_defect(self) -> float:
        """Frobenius norm of ``tr_out M - I_in``."""
        red = partial_trace(self.matrix, [self.in_dim, self.out_dim], [0])
        return float(np.linalg.norm(red - np.eye(self.in_dim)))

    def is_tp(self, tol: float = TOL.equality) -> bool:
        return self.trace_defect() <= tol

    def apply(self, rho) -> np.ndarray:
        return choi_apply(self, rho)

    def distance(self, other: "ChoiOperator") -> float:
        return float(np.linalg.norm(self.matrix - other.matrix))


@dataclass(frozen=True)
class Povm:
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        els = tuple(as_matrix(e) for e in self.elements)
        if not els:
            raise ValueError("a POVM needs at least one element")
        d = els[0].shape[0]
        for e in els:
            if not is_psd(e, 1e-10):
                raise ValueError("POVM element is not positive")
        if np.linalg.norm(sum(els) - np.eye(d)) > TOL.equality:
            raise ValueError("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", els)


@dataclass(frozen=True)
class QuantumInstrument:
    """Classical-input indexed family of Kraus sets ``{E_{k,o|i}}``.

    ``elements[i][o]`` is the list of Kraus operators of outcome ``o``
    given classical input ``i``.
    """

    in_dim: int
    out_dim: int
    elements: Mapping[Hashable, Mapping[Hashable, Sequence[np.ndarray]]] = field(
        default_factory=dict
    )
    validate: bool = True

    def __post_init__(self):
        clean = {}
        for i, outs in self.elements.items():
            clean[i] = {}
            for o, ks in outs.items():
                clean[i][o] = [as_matrix(k, self.out_dim, self.in_dim) for k in ks]
        object.__setattr__(self, "elements", clean)
        if self.validate:
            for i in clean:
                defect = self.completeness_defect(i)
                if defect > TOL.equality:
                    raise ValueError(f"completeness violated for input {i!r}: {defect:.3e}")

    @classmethod
    def single(cls, outcomes: Mapping[Hashable, Sequence[np.ndarray]], **kw) -> "QuantumInstrument":
        first = next(iter(outcomes.values()))[0]
        first = np.asarray(first)
        return cls(first.shape[1], first.shape[0], {0: outcomes}, **kw)

    @property
    def inputs(self) -> list:
        return list(self.elements)

    def outcomes(self, i=0) -> list:
        return list(self.elements[i])

    def completeness_defect(self, i=0) -> float:
        acc = np.zeros((self.in_dim, self.in_dim), dtype=complex)
        for ks in self.elements[i].values():
            for k in ks:
                acc += dagger(k) @ k
        return float(np.linalg.norm(acc - np.eye(self.in_dim)))

    def choi(self, o, i=0) -> ChoiOperator:
        return kraus_to_choi(self.elements[i][o], self.in_dim)

    def apply(self, rho, o, i=0) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return sum(k @ rho @ dagger(k) for k in self.elements[i][o])


def kraus_to_choi(kraus: Sequence[np.ndarray], in_dim: int | None = None) -> ChoiOperator:
    """CJ operator of ``rho -> sum_j E_j rho E_j^dag``."""
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    if not ks:
        raise ValueError("need at least one Kraus operator")
    out_dim, d_in = ks[0].shape
    if in_dim is not None and d_in != in_dim:
        raise DimensionError("Kraus operators do not match in_dim")
    for k in ks:
        if k.shape != (out_dim, d_in):
            raise DimensionError("inconsistent Kraus operator shapes")
    m = np.zeros((d_in * out_dim, d_in * out_dim), dtype=complex)
    for k in ks:
        # vec_j = sum_a |a> (x) E|a> is the j-th unnormalised CJ vector.
        v = k.T.reshape(-1)
        m += np.outer(v, v.conj())
    return ChoiOperator(m, d_in, out_dim)


def choi_to_kraus(choi: ChoiOperator, floor: float = TOL.kraus_floor) -> list[np.ndarray]:
    """Kraus operators from the spectral decomposition of a CP CJ matrix."""
    w, v = eig_hermitian(choi.matrix, tol=max(1e-10, 1e-10 * np.linalg.norm(choi.matrix)))
    ks = []
    for lam, vec in zip(w[::-1], v.T[::-1]):
        if lam <= floor:
            continue
        ks.append(np.sqrt(lam) * vec.reshape(choi.in_dim, choi.out_dim).T)
    return ks


def choi_apply(choi: ChoiOperator, rho) -> np.ndarray:
    """``tr_in[M (rho^T (x) I_out)]``; ``rho`` may be any operator on H_in."""
    rho = as_matrix(rho, choi.in_dim, choi.in_dim)
    t = choi.matrix.reshape(choi.in_dim, choi.out_dim, choi.in_dim, choi.out_dim)
    return np.einsum("aibj,ab->ij", t, rho)


def choi_of_unitary(u) -> ChoiOperator:
    return kraus_to_choi([np.asarray(u, dtype=complex)])


def choi_compose(second: ChoiOperator, first: ChoiOperator) -> ChoiOperator:
    """CJ operator of ``second o first``."""
    if first.out_dim != second.in_dim:
        raise DimensionError("composition dimension mismatch")
    d = first.in_dim
    m = np.zeros((d * second.out_dim, d * second.out_dim), dtype=complex)
    for k in range(d):
        for l in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[k, l] = 1
            block = choi_apply(second, choi_apply(first, e))
            m[k * second.out_dim : (k + 1) * second.out_dim, l * second.out_dim : (l + 1) * second.out_dim] = block
    return ChoiOperator(m, d, second.out_dim)


def choi_tensor(*chois: ChoiOperator) -> ChoiOperator:
    """CJ operator of the parallel product, ordered ``(in_1..in_n) (x) (out_1..out_n)``."""
    if not chois:
        raise ValueError("need at least one CJ operator")
    ms = kron(*[c.matrix for c in chois])
    dims = []
    for c in chois:
        dims += [c.in_dim, c.out_dim]
    n = len(chois)
    perm = [2 * j for j in range(n)] + [2 * j + 1 for j in range(n)]
    din = int(np.prod([c.in_dim for c in chois]))
    dout = int(np.prod([c.out_dim for c in chois]))
    return ChoiOperator(permute_subsystems(ms, dims, perm), din, dout)


# ---------------------------------------------------------------------------
# Dilation of an instrument into unitary + projective measurement


@dataclass(frozen=True)
class Dilation:
    """``U |psi>_in |0>_R = sum_{k,o} (E_{k,o}|psi>)|k,o>_M``.

    ``unitary`` acts on ``H_in (x) H_R`` and equals ``H_out (x) H_M``.
    ``projectors[o]`` acts on ``H_M``.
    """

    in_dim: int
    out_dim: int
    ancilla_dim: int
    register_dim: int
    unitary: np.ndarray
    outcome_labels: tuple
    projectors: tuple[np.ndarray, ...]

    def povm(self) -> Povm:
        return Povm(self.projectors)

    def run(self, rho) -> list[tuple[float, np.ndarray]]:
        """Attach ``|0>_R``, apply U, measure M; returns ``(p(o), post_state)``."""
        rho = np.asarray(rho, dtype=complex)
        r0 = np.zeros((self.ancilla_dim, self.ancilla_dim), dtype=complex)
        r0[0, 0] = 1
        full = self.unitary @ np.kron(rho, r0) @ dagger(self.unitary)
        out = []
        for p in self.projectors:
            op = np.kron(np.eye(self.out_dim), p)
            branch = op @ full @ op
            red = partial_trace(branch, [self.out_dim, self.register_dim], [0])
            prob = float(np.trace(red).real)
            out.append((prob, red / prob if prob > 1e-14 else red))
        return out


def _complete_unitary(cols: np.ndarray, fixed_idx: Sequence[int], dim: int) -> np.ndarray:
    """Place orthonormal ``cols`` at ``fixed_idx`` and fill the rest by Gram-Schmidt."""
    u = np.zeros((dim, dim), dtype=complex)
    basis = [c for c in cols.T]
    for j, c in zip(fixed_idx, basis):
        u[:, j] = c
    free = [j for j in range(dim) if j not in set(fixed_idx)]
    cand = 0
    for j in free:
        while True:
            e = np.zeros(dim, dtype=complex)
            e[cand] = 1
            cand += 1
            for b in basis:
                e = e - b * np.vdot(b, e)
            for b in basis:
                e = e - b * np.vdot(b, e)
            n = np.linalg.norm(e)
            if n > 1e-8:
                e = e / n
                break
        basis.append(e)
        u[:, j] = e
    return u


def dilate_instrument(inst: QuantumInstrument, i=0) -> Dilation:
    """Unitary dilation of the instrument for classical input ``i``."""
    defect = inst.completeness_defect(i)
    if defect > TOL.equality:
        raise ValueError(f"instrument is not complete: defect {defect:.3e}")
    outs = inst.outcomes(i)
    kmax = max(len(inst.elements[i][o]) for o in outs)
    slots = kmax * len(outs)
    din, dout = inst.in_dim, inst.out_dim
    step = din // gcd(din, dout)
    m = -(-slots // step) * step
    r = dout * m // din
    dim = dout * m
    v = np.zeros((dim, din), dtype=complex)
    for oi, o in enumerate(outs):
        for k, e in enumerate(inst.elements[i][o]):
            slot = oi * kmax + k
            reg = np.zeros(m)
            reg[slot] = 1
            v += np.kron(e, reg.reshape(m, 1))
    fixed = [j * r for j in range(din)]
    u = _complete_unitary(v, fixed, dim)
    projs = []
    for oi in range(len(outs)):
        p = np.zeros((m, m), dtype=complex)
        for k in range(kmax):
            p[oi * kmax + k, oi * kmax + k] = 1
        if oi == len(outs) - 1:
            for s in range(slots, m):
                p[s, s] = 1
        projs.append(p)
    return Dilation(din, dout, r, m, u, tuple(outs), tuple(projs))


# ---------------------------------------------------------------------------
# Separable operations


@dataclass(frozen=True)
class SeparableReport:
    choi: ChoiOperator
    cp: bool
    tp: bool
    trace_defect: float


def separable_operator(terms: Sequence[Sequence[np.ndarray]]) -> SeparableReport:
    """Assemble ``sum_k (E_k^(1) (x) ... (x) E_k^(N))`` conjugation as one CJ.

    ``terms[k][n]`` is party ``n``'s Kraus factor in term ``k``.
    """
    if not terms:
        raise ValueError("need at least one separable term")
    nparty = len(terms[0])
    shapes = [np.asarray(f).shape for f in terms[0]]
    kraus = []
    for t in terms:
        if len(t) != nparty or [np.asarray(f).shape for f in t] != shapes:
            raise DimensionError("inconsistent party factor dimensions")
        kraus.append(kron(*t))
    c = kraus_to_choi(kraus)
    return SeparableReport(c, c.is_cp(), c.is_tp(), c.trace_defect())


is_separable_operator_decomposition = separable_operator


# ---------------------------------------------------------------------------
# JSON


def instrument_to_json(inst: QuantumInstrument) -> dict:
    return {
        "in_dim": inst.in_dim,
        "out_dim": inst.out_dim,
        "classical_inputs": [
            {
                "label": i,
                "outcomes": [
                    {"label": o, "kraus": [matrix_to_json(k) for k in ks]}
                    for o, ks in outs.items()
                ],
            }
            for i, outs in inst.elements.items()
        ],
    }


def instrument_from_json(obj: dict) -> QuantumInstrument:
    try:
        elements = {
            ci["label"]: {
                o["label"]: [matrix_from_json(k) for k in o["kraus"]] for o in ci["outcomes"]
            }
            for ci in obj["classical_inputs"]
        }
        return QuantumInstrument(int(obj["in_dim"]), int(obj["out_dim"]), elements)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed instrument JSON: {exc}") from exc
