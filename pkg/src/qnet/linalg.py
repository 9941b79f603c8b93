"""Dense complex linear-algebra primitives.

Matrices are plain ``numpy`` complex arrays. Constructors in this module
validate shape and finiteness; everything else is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

MAX_DIM = 2**12


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every module."""

    equality: float = 1e-9
    rank: float = 1e-8
    kraus_floor: float = 1e-10
    support_floor: float = 1e-10
    overlap: float = 1e-8
    normalization: float = 1e-12

    def as_dict(self) -> dict:
        return dict(self.__dict__)


TOL = Tolerances()


class DimensionError(ValueError):
    """Raised on inconsistent shapes or subsystem dimensions."""


class NumericalError(RuntimeError):
    """Raised when a decomposition fails to converge."""


def check_dim(n: int) -> None:
    if n > MAX_DIM:
        raise DimensionError(f"total dimension {n} exceeds the limit {MAX_DIM}")


def as_matrix(m, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Validate and return ``m`` as a finite 2-d complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    if rows is not None and a.shape[0] != rows:
        raise DimensionError(f"expected {rows} rows, got {a.shape[0]}")
    if cols is not None and a.shape[1] != cols:
        raise DimensionError(f"expected {cols} cols, got {a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains NaN or Inf")
    check_dim(max(a.shape))
    return a


def as_state(v, normalized: bool = True, tol: float = TOL.normalization) -> np.ndarray:
    """Validate a state vector; optionally require unit norm."""
    a = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError("state contains NaN or Inf")
    check_dim(a.size)
    if normalized and abs(np.linalg.norm(a) - 1.0) > tol:
        raise ValueError(f"state norm {np.linalg.norm(a):.3e} is not 1")
    return a


def normalize(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    n = np.linalg.norm(a)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return a / n


def ket(index: int | str, dim: int | None = None) -> np.ndarray:
    """Computational basis ket; ``index`` may be a bit string like ``'0110'``."""
    if isinstance(index, str):
        dim = 2 ** len(index)
        index = int(index, 2)
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def kron(*ms) -> np.ndarray:
    """Kronecker product of any number of matrices (or vectors)."""
    if not ms:
        return np.ones((1, 1), dtype=complex)
    out = reduce(np.kron, [np.asarray(m, dtype=complex) for m in ms])
    check_dim(max(out.shape))
    return out


def dagger(m) -> np.ndarray:
    return np.asarray(m, dtype=complex).conj().T


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[-1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def frobenius_distance(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def _check_dims(n: int, dims: Sequence[int]) -> None:
    if int(np.prod(dims)) != n:
        raise DimensionError(f"subsystem dims {list(dims)} do not multiply to {n}")


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    The kept subsystems retain their original relative order.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError("partial_trace needs a square matrix")
    dims = list(dims)
    _check_dims(m.shape[0], dims)
    keep = sorted(set(keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} subsystems")
    t = m.reshape(dims + dims)
    trace_out = [i for i in range(n) if i not in keep]
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in trace_out:
        col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    r = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return r.reshape(d, d)


def permute_subsystems(m, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new factor ``j`` is old factor ``perm[j]``.

    Works for square matrices (both indices permuted) and vectors.
    """
    m = np.asarray(m, dtype=complex)
    dims = list(dims)
    n = len(dims)
    new_dims = [dims[p] for p in perm]
    if m.ndim == 1:
        _check_dims(m.size, dims)
        return m.reshape(dims).transpose(perm).reshape(-1)
    _check_dims(m.shape[0], dims)
    t = m.reshape(dims + dims).transpose(list(perm) + [n + p for p in perm])
    d = int(np.prod(new_dims))
    return t.reshape(d, d)


def svd(m):
    """Return ``(U, s, Vh)`` with ``m = U diag(s) Vh`` and ``s`` descending."""
    m = as_matrix(m)
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return u, s, vh


def eig_hermitian(m, tol: float = 1e-10):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError("eig_hermitian needs a square matrix")
    if np.linalg.norm(m - dagger(m)) >= tol:
        raise ValueError("matrix is not Hermitian")
    try:
        w, v = np.linalg.eigh((m + dagger(m)) / 2)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigh did not converge: {exc}") from exc
    return w, v


def is_unitary(u, tol: float = TOL.equality) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) <= tol


def is_hermitian(m, tol: float = 1e-10) -> bool:
    m = np.asarray(m, dtype=complex)
    return m.shape[0] == m.shape[1] and np.linalg.norm(m - m.conj().T) <= tol


def is_psd(m, tol: float = 1e-10) -> bool:
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol=max(tol, 1e-10) * max(1.0, np.linalg.norm(m))):
        return False
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2).min()) >= -tol


def phase_distance(a, b) -> float:
    """Frobenius distance between ``a`` and ``b`` minimised over a global phase."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ip = np.vdot(b, a)
    ph = ip / abs(ip) if abs(ip) > 1e-300 else 1.0
    return frobenius_distance(a, ph * b)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase fix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_state(d: int, rng: np.random.Generator) -> np.ndarray:
    return normalize(rng.standard_normal(d) + 1j * rng.standard_normal(d))


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": m.real.reshape(-1).tolist(),
        "im": m.imag.reshape(-1).tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", [0.0] * (rows * cols)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if re.size != rows * cols or im.size != rows * cols:
        raise DimensionError("entries length does not equal rows*cols")
    return as_matrix((re + 1j * im).reshape(rows, cols))


# Common single-qubit gates.
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
T = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)
PAULIS = (I2, X, Y, Z)


def controlled(u, control_value: int = 1) -> np.ndarray:
    """Two-party controlled gate ``|c><c| (x) u + (others) (x) I`` with a qubit control."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    p1 = proj(ket(control_value, 2))
    p0 = np.eye(2) - p1
    return np.kron(p0, np.eye(d)) + np.kron(p1, u)


CNOT = controlled(X)
CZ = controlled(Z)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
