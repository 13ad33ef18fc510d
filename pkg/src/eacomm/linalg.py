"""Dense complex linear algebra on qubit registers.

Qubit 0 is the most significant bit of a basis index, so ``tensor(a, b)``
(plain Kronecker product) puts the qubits of ``a`` before those of ``b``.
States and operators are plain numpy arrays; nothing here mutates its
arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .config import MAX_RANDOM_UNITARY_QUBITS, TOL


class LinalgError(ValueError):
    """Raised on dimension mismatches and violated operator preconditions."""


def num_qubits(dim: int) -> int:
    k = int(dim).bit_length() - 1
    if dim < 1 or 1 << k != dim:
        raise LinalgError(f"dimension {dim} is not a power of two")
    return k


def basis_state(index: int, k: int) -> np.ndarray:
    v = np.zeros(1 << k, dtype=complex)
    v[index] = 1.0
    return v


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of vectors or matrices, left factor most significant."""
    if not ops:
        return np.ones(1, dtype=complex)
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def is_unitary(u: np.ndarray, tol: float = TOL.unitary) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])), initial=0.0) <= tol)


def gram_deviation(rows: np.ndarray) -> float:
    """Max entrywise deviation of the Gram matrix of ``rows`` from identity."""
    rows = np.atleast_2d(rows)
    g = rows.conj() @ rows.T
    return float(np.max(np.abs(g - np.eye(len(rows))), initial=0.0))


def apply_on(u: np.ndarray, targets: Sequence[int], s: np.ndarray,
             strict: bool = False) -> np.ndarray:
    """Apply ``u`` to the qubits ``targets`` of ``s``, identity elsewhere.

    ``s`` may carry trailing axes (e.g. the columns of a matrix); only its
    first axis is interpreted as the register.
    """
    u = np.asarray(u, dtype=complex)
    s = np.asarray(s, dtype=complex)
    targets = list(targets)
    k = num_qubits(s.shape[0])
    t = num_qubits(u.shape[0])
    if u.shape != (1 << t, 1 << t):
        raise LinalgError(f"gate must be square, got {u.shape}")
    if len(targets) != t:
        raise LinalgError(f"gate acts on {t} qubits but {len(targets)} targets given")
    if len(set(targets)) != t or any(q < 0 or q >= k for q in targets):
        raise LinalgError(f"invalid targets {targets} for a {k}-qubit register")
    if strict and not is_unitary(u):
        raise LinalgError("gate is not unitary")
    if t == 0:
        return u[0, 0] * s
    rest = s.shape[1:]
    psi = s.reshape((2,) * k + rest)
    g = u.reshape((2,) * (2 * t))
    out = np.tensordot(g, psi, axes=(list(range(t, 2 * t)), targets))
    # tensordot leaves the gate's output axes in front; put them back.
    out = np.moveaxis(out, list(range(t)), targets)
    return out.reshape(s.shape)


def embed(u: np.ndarray, targets: Sequence[int], k: int) -> np.ndarray:
    """Full ``2^k`` matrix of ``u`` acting on ``targets``."""
    return apply_on(u, targets, np.eye(1 << k, dtype=complex))


def permutation_unitary(perm: Sequence[int]) -> np.ndarray:
    """Unitary P with new qubit ``j`` taking the value of old qubit ``perm[j]``."""
    k = len(perm)
    if sorted(perm) != list(range(k)):
        raise LinalgError(f"{list(perm)} is not a permutation")
    eye = np.eye(1 << k, dtype=complex).reshape((2,) * k + (1 << k,))
    return np.transpose(eye, list(perm) + [k]).reshape(1 << k, 1 << k)


def _as_density(rho_or_psi: np.ndarray) -> tuple[np.ndarray, bool]:
    a = np.asarray(rho_or_psi, dtype=complex)
    if a.ndim == 1:
        return a, True
    if a.ndim == 2 and a.shape[0] == a.shape[1]:
        return a, False
    raise LinalgError(f"expected a state vector or square matrix, got shape {a.shape}")


def partial_trace(rho_or_psi: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on ``keep``, with qubits in the order given."""
    a, is_vec = _as_density(rho_or_psi)
    k = num_qubits(a.shape[0])
    keep = list(keep)
    if len(set(keep)) != len(keep) or any(q < 0 or q >= k for q in keep):
        raise LinalgError(f"invalid keep list {keep} for {k} qubits")
    rest = [q for q in range(k) if q not in keep]
    dk, dr = 1 << len(keep), 1 << len(rest)
    if is_vec:
        m = np.transpose(a.reshape((2,) * k), keep + rest).reshape(dk, dr)
        return m @ m.conj().T
    t = a.reshape((2,) * (2 * k))
    t = np.transpose(t, keep + rest + [k + q for q in keep] + [k + q for q in rest])
    t = t.reshape(dk, dr, dk, dr)
    return np.einsum("arbr->ab", t)


@dataclass(frozen=True)
class SchmidtForm:
    """``psi = sum_i coeffs[i] * kron(left[:, i], right[:, i])``."""

    coeffs: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def lambdas(self) -> np.ndarray:
        return self.coeffs ** 2

    def reconstruct(self) -> np.ndarray:
        return np.einsum("i,ai,bi->ab", self.coeffs, self.left, self.right).reshape(-1)


def schmidt(s: np.ndarray, cut: int, rank_tol: float = 1e-12) -> SchmidtForm:
    """Schmidt decomposition across the cut after the first ``cut`` qubits.

    Coefficients below ``rank_tol`` are dropped, so a product state has a
    single coefficient.
    """
    s = np.asarray(s, dtype=complex)
    k = num_qubits(s.shape[0])
    if not 0 <= cut <= k:
        raise LinalgError(f"cut {cut} outside 0..{k}")
    if abs(np.linalg.norm(s) - 1.0) > TOL.norm:
        raise LinalgError("schmidt() needs a normalized state")
    u, sv, vh = np.linalg.svd(s.reshape(1 << cut, 1 << (k - cut)), full_matrices=False)
    r = max(1, int(np.sum(sv > rank_tol)))
    return SchmidtForm(coeffs=sv[:r], left=u[:, :r], right=vh[:r].T)


def pgm_sqrt_inv(rho: np.ndarray, tol: float = TOL.pinv_rel) -> np.ndarray:
    """Inverse square root of ``rho`` on its support (zero elsewhere)."""
    rho = np.asarray(rho, dtype=complex)
    h = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(h)
    if w.size and w[0] < -TOL.psd:
        raise LinalgError(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    cutoff = tol * max(w[-1], 0.0) if w.size else 0.0
    inv = np.zeros_like(w)
    mask = w > cutoff
    inv[mask] = w[mask] ** -0.5
    return (v * inv) @ v.conj().T


def support_projector(rho: np.ndarray, tol: float = TOL.pinv_rel) -> np.ndarray:
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    cutoff = tol * max(w[-1], 0.0) if w.size else 0.0
    vs = v[:, w > cutoff]
    return vs @ vs.conj().T


def trace_norm(a: np.ndarray) -> float:
    a = np.asarray(a, dtype=complex)
    return float(np.sum(np.abs(np.linalg.eigvalsh((a + a.conj().T) / 2))))


def random_unitary(k: int, seed: int, cap: int = MAX_RANDOM_UNITARY_QUBITS) -> np.ndarray:
    """Seeded ``2^k`` unitary from QR of a complex Gaussian matrix.

    The diagonal of R is made positive, which gives the Haar measure.
    """
    if k < 0 or k > cap:
        raise LinalgError(f"random_unitary: k={k} outside 0..{cap}")
    rng = np.random.default_rng(seed)
    d = 1 << k
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_state(k: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(1 << k) + 1j * rng.standard_normal(1 << k)
    return v / np.linalg.norm(v)


def complete_to_unitary(psi: np.ndarray) -> np.ndarray:
    """A unitary whose first column is the unit vector ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    d = psi.shape[0]
    q, _ = np.linalg.qr(np.column_stack([psi, np.eye(d, dtype=complex)]))
    q = q[:, :d]
    # QR fixes the first column only up to a phase.
    q[:, 0] *= np.vdot(q[:, 0], psi) / abs(np.vdot(q[:, 0], psi))
    return q
