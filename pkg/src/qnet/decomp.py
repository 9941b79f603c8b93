"""Schmidt, operator-Schmidt and Kraus-Cirac decompositions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import (
    TOL,
    DimensionError,
    NumericalError,
    I2,
    H,
    S,
    X,
    Y,
    Z,
    as_matrix,
    as_state,
    dagger,
    is_unitary,
    kron,
    phase_distance,
    svd,
)

XX = np.kron(X, X)
YY = np.kron(Y, Y)
ZZ = np.kron(Z, Z)

# Columns of MAGIC are the magic basis; local SU(2)xSU(2) becomes real SO(4).
MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / np.sqrt(2)


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray
    rank: int


@dataclass(frozen=True)
class OperatorSchmidtDecomposition:
    """``M = sum_i c_i A_i (x) B_i`` with ``tr(A_i^dag A_j)/d_A = delta_ij``."""

    coefficients: np.ndarray
    left: list
    right: list
    rank: int

    def reconstruct(self) -> np.ndarray:
        return sum(c * np.kron(a, b) for c, a, b in zip(self.coefficients, self.left, self.right))


def schmidt(state, dims: tuple[int, int], tol: float = TOL.rank) -> SchmidtDecomposition:
    """Schmidt decomposition across ``dims = (d_A, d_B)``."""
    psi = as_state(state, normalized=False)
    da, db = dims
    if da * db != psi.size:
        raise DimensionError(f"dims {dims} do not factor a state of size {psi.size}")
    u, s, vh = svd(psi.reshape(da, db))
    rank = int(np.sum(s > tol))
    return SchmidtDecomposition(s, u, vh.T, rank)


def schmidt_rank(state, dims, tol: float = TOL.rank) -> int:
    return schmidt(state, dims, tol).rank


def realign(m, dims: tuple[int, int]) -> np.ndarray:
    """``R[(i,k),(j,l)] = M[(i,j),(k,l)]`` so that ``A (x) B`` maps to ``vec A vec B^T``."""
    da, db = dims
    return np.asarray(m).reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)


def operator_schmidt(m, dims: tuple[int, int], tol: float = TOL.rank) -> OperatorSchmidtDecomposition:
    m = as_matrix(m)
    da, db = dims
    if m.shape != (da * db, da * db):
        raise DimensionError(f"operator of shape {m.shape} does not match dims {dims}")
    # The guard applies to the operator; its realignment may be wider.
    try:
        u, s, vh = np.linalg.svd(realign(m, dims), full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    coeffs = s / np.sqrt(da * db)
    left = [np.sqrt(da) * u[:, i].reshape(da, da) for i in range(len(s))]
    right = [np.sqrt(db) * vh[i].reshape(db, db) for i in range(len(s))]
    rank = int(np.sum(coeffs > tol))
    return OperatorSchmidtDecomposition(coeffs, left, right, rank)


def operator_schmidt_rank(m, dims=(2, 2), tol: float = TOL.rank) -> int:
    return operator_schmidt(m, dims, tol).rank


def split_local(m, dims: tuple[int, int] = (2, 2)) -> tuple[np.ndarray, np.ndarray]:
    """Factor a product operator ``a (x) b``; unitary factors come out unitary."""
    d = operator_schmidt(m, dims)
    c = d.coefficients[0]
    a = d.left[0] * np.sqrt(c)
    b = d.right[0] * np.sqrt(c)
    na = np.sqrt(np.trace(dagger(a) @ a).real / dims[0])
    if na > 0:
        a, b = a / na, b * na
    return a, b


def schmidt_strength(u, dims: tuple[int, int] = (2, 2)) -> float:
    """Shannon entropy (bits) of the normalised squared operator-Schmidt coefficients."""
    c = operator_schmidt(u, dims).coefficients
    p = c**2 / np.sum(c**2)
    p = p[p > 1e-15]
    return float(-np.sum(p * np.log2(p)))


# ---------------------------------------------------------------------------
# Kraus-Cirac


def canonical_gate(x: float, y: float, z: float) -> np.ndarray:
    """``exp(i(x XX + y YY + z ZZ))`` via the magic-basis diagonal form."""
    sx, sy, sz = (np.real(np.diag(dagger(MAGIC) @ P @ MAGIC)) for P in (XX, YY, ZZ))
    return MAGIC @ np.diag(np.exp(1j * (x * sx + y * sy + z * sz))) @ dagger(MAGIC)


def _sign_vectors():
    return np.array([np.real(np.diag(dagger(MAGIC) @ P @ MAGIC)) for P in (XX, YY, ZZ)])


def _pauli_action(l: np.ndarray) -> np.ndarray:
    """Matrix ``sigma`` with ``L P_a L^dag = sum_b sigma[a,b] P_b`` for ``P = XX,YY,ZZ``."""
    paulis = (XX, YY, ZZ)
    sig = np.zeros((3, 3))
    for a, pa in enumerate(paulis):
        t = l @ pa @ dagger(l)
        for b, pb in enumerate(paulis):
            sig[a, b] = np.real(np.trace(dagger(pb) @ t)) / 4
    return sig


_RX = scipy.linalg.expm(-1j * np.pi / 4 * X)
_PERM = {(0, 1): np.kron(S, S), (0, 2): np.kron(H, H), (1, 2): np.kron(_RX, _RX)}
_FLIP = {(0, 1): np.kron(Z, I2), (1, 2): np.kron(X, I2), (0, 2): np.kron(Y, I2)}
_SHIFT = (XX, YY, ZZ)


@dataclass
class _KCState:
    k1: np.ndarray
    v: np.ndarray
    k2: np.ndarray

    def conj(self, l: np.ndarray) -> None:
        # K1 N(v) K2 = (K1 L^dag) N(sigma^T v) (L K2)
        sig = _pauli_action(l)
        self.k1 = self.k1 @ dagger(l)
        self.k2 = l @ self.k2
        self.v = sig.T @ self.v

    def shift(self, a: int, direction: int) -> None:
        # N(v) = N(v - d e_a pi/2) exp(i d pi/2 P_a), exp(i pi/2 P) = iP
        self.v[a] -= direction * np.pi / 2
        self.k2 = (1j * direction * _SHIFT[a]) @ self.k2


@dataclass(frozen=True)
class KrausCiracForm:
    """``U = e^{i phase} (u (x) u') exp(i(xXX+yYY+zZZ)) (w (x) w')``."""

    u: np.ndarray
    u_prime: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray
    x: float
    y: float
    z: float
    kc_number: int
    global_phase: float
    reconstruction_error: float
    ties: tuple = field(default=())

    @property
    def params(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def reconstruct(self) -> np.ndarray:
        return (
            np.exp(1j * self.global_phase)
            * np.kron(self.u, self.u_prime)
            @ canonical_gate(self.x, self.y, self.z)
            @ np.kron(self.w, self.w_prime)
        )


def _real_simultaneous_diag(s: np.ndarray) -> np.ndarray:
    """Real orthogonal ``P`` (det 1) diagonalising the symmetric unitary ``s``."""
    re, im = s.real, s.imag
    best, best_off = None, np.inf
    # Re s and Im s commute; a generic real combination separates their eigenspaces.
    for c in (0.5772156649, 1.4142135623, -0.8660254037, 2.7182818284, 0.3183098861, 0.0):
        _, p = np.linalg.eigh(re + c * im)
        d = p.T @ s @ p
        off = np.linalg.norm(d - np.diag(np.diag(d)))
        if off < best_off:
            best, best_off = p, off
        if off < 1e-13:
            break
    p = best
    if np.linalg.det(p) < 0:
        p = p.copy()
        p[:, 0] *= -1
    return p


def kraus_cirac(u, tol: float = TOL.equality, rank_tol: float = TOL.rank) -> KrausCiracForm:
    """Kraus-Cirac form with parameters reduced into the Weyl chamber."""
    u = as_matrix(u, 4, 4)
    if not is_unitary(u, tol):
        raise ValueError("kraus_cirac needs a unitary 4x4 matrix")
    u4 = u / np.linalg.det(u) ** 0.25
    ub = dagger(MAGIC) @ u4 @ MAGIC
    s = ub.T @ ub
    p = _real_simultaneous_diag(s)
    d2 = np.diag(p.T @ s @ p)
    # deterministic ordering on rounded eigenphases
    order = np.lexsort((np.round(np.angle(d2), 9),))
    p = p[:, order]
    if np.linalg.det(p) < 0:
        p[:, 0] *= -1
    d2 = np.diag(p.T @ s @ p)
    dh = np.sqrt(d2)
    if np.real(np.prod(dh)) < 0:
        dh[0] *= -1
    o1 = ub @ p @ np.diag(1 / dh)
    o1 = o1.real
    theta = np.angle(dh)
    signs = _sign_vectors()
    coef = np.vstack([np.ones(4), signs]).T
    sol = np.linalg.solve(coef, theta)
    k1 = MAGIC @ o1 @ dagger(MAGIC)
    k2 = MAGIC @ p.T @ dagger(MAGIC)
    st = _KCState(k1, np.array(sol[1:], dtype=float), k2)
    _reduce_weyl(st)
    x, y, z = (float(t) + 0.0 for t in st.v)
    a1, b1 = split_local(st.k1)
    a2, b2 = split_local(st.k2)
    core = np.kron(a1, b1) @ canonical_gate(x, y, z) @ np.kron(a2, b2)
    ph = np.vdot(core, u)
    phase = float(np.angle(ph))
    err = phase_distance(u, core)
    kc = int(sum(abs(t) > rank_tol for t in (x, y, z)))
    ties = []
    if abs(x - np.pi / 4) < rank_tol and abs(z) < rank_tol:
        ties.append("x=pi/4,z=0")
    if abs(x - y) < rank_tol and y > rank_tol:
        ties.append("x=y")
    if abs(y - z) < rank_tol and z > rank_tol:
        ties.append("y=z")
    return KrausCiracForm(a1, b1, a2, b2, x, y, z, kc, phase, err, tuple(ties))


def _reduce_weyl(st: _KCState) -> None:
    # 1. each parameter into (-pi/4, pi/4]
    for a in range(3):
        while st.v[a] > np.pi / 4 + 1e-12:
            st.shift(a, +1)
        while st.v[a] <= -np.pi / 4 + 1e-12:
            st.shift(a, -1)
    # 2. sort by magnitude, descending
    for i, j in ((0, 1), (1, 2), (0, 1)):
        if abs(st.v[i]) < abs(st.v[j]) - 1e-13:
            st.conj(_PERM[(i, j)])
    # 3. make x, y non-negative; the leftover sign sits on z
    if st.v[0] < 0:
        st.conj(_FLIP[(0, 2)])
    if st.v[1] < 0:
        st.conj(_FLIP[(1, 2)])
    # 4. negative z: (x, y, z) -> (pi/2 - x, y, -z)
    if st.v[2] < -1e-14:
        st.conj(_FLIP[(0, 2)])
        st.shift(0, -1)
    elif st.v[2] < 0:
        st.v[2] = 0.0
    if abs(st.v[1]) < 1e-15:
        st.v[1] = 0.0


def kc_number(u, rank_tol: float = TOL.rank) -> int:
    return kraus_cirac(u, rank_tol=rank_tol).kc_number


# ---------------------------------------------------------------------------
# Table classification

TABLE_ROWS = (
    (1, 0, "local unitary"),
    (2, 1, "controlled-phase"),
    (4, 2, "matchgate"),
    (4, 3, "generic"),
)


class ClassificationError(RuntimeError):
    """Raised when an (Op#, KC#) pair falls outside the classification table."""


def kc_from_op_rank(op_rank: int, is_matchgate: bool | None = None) -> dict:
    """Classification row implied by the operator Schmidt rank."""
    if op_rank == 1:
        return {"op_rank": 1, "kc_number": 0, "class": "local unitary"}
    if op_rank == 2:
        return {"op_rank": 2, "kc_number": 1, "class": "controlled-phase"}
    if op_rank == 3:
        raise ClassificationError("operator Schmidt rank 3 cannot occur for a two-qubit unitary")
    if op_rank == 4:
        if is_matchgate is None:
            return {"op_rank": 4, "kc_number": (2, 3), "class": "matchgate or generic"}
        return (
            {"op_rank": 4, "kc_number": 2, "class": "matchgate"}
            if is_matchgate
            else {"op_rank": 4, "kc_number": 3, "class": "generic"}
        )
    raise ValueError(f"invalid operator Schmidt rank {op_rank}")


def classify(u, tol: float = TOL.rank) -> dict:
    """Decomposition report ``{op_rank, kc_number, x, y, z, reconstruction_error}``."""
    kc = kraus_cirac(u, rank_tol=tol)
    op = operator_schmidt_rank(u, (2, 2), tol)
    row = kc_from_op_rank(op, is_matchgate=kc.kc_number == 2 if op == 4 else None)
    if row["kc_number"] != kc.kc_number:
        raise ClassificationError(f"(Op#={op}, KC#={kc.kc_number}) is not a table row")
    return {
        "op_rank": op,
        "kc_number": kc.kc_number,
        "class": row["class"],
        "x": kc.x,
        "y": kc.y,
        "z": kc.z,
        "reconstruction_error": kc.reconstruction_error,
        "ties": list(kc.ties),
    }


# ---------------------------------------------------------------------------
# Controlled unitaries


def cphase(theta: float) -> np.ndarray:
    return np.diag([1, 1, 1, np.exp(1j * theta)]).astype(complex)


def controlled_phase_canonicalize(u, tol: float = TOL.equality):
    """Write ``|0><0| (x) I + |1><1| (x) v`` as ``(u3 (x) u4) U(theta) (u1 (x) u2)``."""
    u = as_matrix(u, 4, 4)
    v = u[2:, 2:]
    if (
        np.linalg.norm(u[:2, :2] - I2) > tol
        or np.linalg.norm(u[:2, 2:]) > tol
        or np.linalg.norm(u[2:, :2]) > tol
        or not is_unitary(v, tol)
    ):
        raise ValueError("input is not of the form |0><0|(x)I + |1><1|(x)v")
    t, q = scipy.linalg.schur(v, output="complex")
    mu = np.diag(t)
    order = sorted(range(2), key=lambda k: (-round(mu[k].real, 12), round(mu[k].imag, 12)))
    mu = mu[order]
    q = q[:, order]
    for k in range(2):
        lead = q[np.argmax(np.abs(q[:, k]) > 1e-12), k]
        q[:, k] *= abs(lead) / lead
    alpha = float(np.angle(mu[0]))
    theta = float(np.angle(mu[1] / mu[0]))
    u1 = I2.copy()
    u2 = dagger(q)
    u3 = np.diag([1, np.exp(1j * alpha)]).astype(complex)
    u4 = q
    return u1, u2, u3, u4, theta


def is_controlled_form(u, tol: float = TOL.equality) -> bool:
    try:
        controlled_phase_canonicalize(u, tol)
    except ValueError:
        return False
    return True


def local_pair(a, b) -> np.ndarray:
    return kron(a, b)
