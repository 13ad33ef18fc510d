"""One-way encodings over shared entanglement, and the decoders used on them.

An encoding scheme has Alice apply a message-dependent unitary ``V_x`` to her
``E`` halves of the shared state ``sum_a sqrt(lambda_a)|a>|a>`` and send her
rightmost ``m`` qubits. Bob then holds ``m + E`` qubits (received ones first).
His mixed state is built directly in closed form, as the result of Alice
measuring her remaining qubits in the computational basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import gates, linalg
from .certificate import certify_protocol
from .config import TOL
from .linalg import LinalgError
from .model import (ALICE, BOB, Gate, MessageGate, Protocol, Round, bits_to_int,
                    int_to_bits, messages)


@dataclass(frozen=True, eq=False)
class EncodingScheme:
    E: int
    m: int
    n: int
    encoders: np.ndarray
    schmidt: np.ndarray | None = None

    def __post_init__(self):
        enc = np.asarray(self.encoders, dtype=complex)
        object.__setattr__(self, "encoders", enc)
        d = 1 << self.E
        if enc.shape != (1 << self.n, d, d):
            raise LinalgError(f"encoders must have shape {(1 << self.n, d, d)}, got {enc.shape}")
        if not 0 <= self.m <= self.E:
            raise LinalgError(f"cannot send m={self.m} of E={self.E} qubits")
        for x, v in enumerate(enc):
            if not linalg.is_unitary(v):
                raise LinalgError(f"encoder for message {x} is not unitary")
        lam = np.full(d, 1.0 / d) if self.schmidt is None else np.asarray(self.schmidt, float)
        if lam.shape != (d,) or np.any(lam < 0) or abs(lam.sum() - 1) > TOL.norm:
            raise LinalgError("Schmidt coefficients must be 2^E non-negative reals summing to 1")
        object.__setattr__(self, "schmidt", lam)

    @property
    def uniform(self) -> bool:
        return bool(np.allclose(self.schmidt, 1.0 / self.schmidt.size, rtol=0, atol=1e-15))


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted pure states for one message; states are rows and may be subnormalized."""

    weights: np.ndarray
    states: np.ndarray

    def density(self) -> np.ndarray:
        s = self.states
        return (s.T * self.weights) @ s.conj()

    def total_weight(self) -> float:
        return float(np.sum(self.weights * np.sum(np.abs(self.states) ** 2, axis=1)))


@dataclass(frozen=True, eq=False)
class Povm:
    """Decoding measurement: ``elements[y]`` for each guess ``y``, plus an optional reject."""

    elements: tuple[np.ndarray, ...]
    reject: np.ndarray | None = None

    def all_elements(self) -> list[np.ndarray]:
        return list(self.elements) + ([self.reject] if self.reject is not None else [])

    def completeness_deviation(self) -> float:
        total = sum(self.all_elements())
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh((e + e.conj().T) / 2)[0])
                   for e in self.all_elements())


def _received_family(v: np.ndarray, E: int, m: int) -> np.ndarray:
    """Rows ``2^{-m/2} sum_r |r> V^T |l r>`` for each ``l`` in {0,1}^(E-m)."""
    vt = v.T
    # column index of V^T is the Alice string (l, r); split it.
    cols = vt.reshape(1 << E, 1 << (E - m), 1 << m)
    return np.transpose(cols, (1, 2, 0)).reshape(1 << (E - m), -1) / np.sqrt(2.0 ** m)


def epr_ensemble(s: EncodingScheme, x) -> Ensemble:
    if not s.uniform:
        raise LinalgError("non-uniform Schmidt coefficients: use general_ensemble")
    x = _index(x, s.n)
    phis = _received_family(s.encoders[x], s.E, s.m)
    return Ensemble(np.full(len(phis), 2.0 ** -(s.E - s.m)), phis)


def general_ensemble(s: EncodingScheme, x) -> Ensemble:
    """Unit weights on the subnormalized states ``2^{m/2} (I_m (x) Lam) phi_l``."""
    x = _index(x, s.n)
    phis = _received_family(s.encoders[x], s.E, s.m)
    lam_diag = np.tile(np.sqrt(s.schmidt), 1 << s.m)
    states = np.sqrt(2.0 ** s.m) * phis * lam_diag
    return Ensemble(np.ones(len(states)), states)


def scheme_ensembles(s: EncodingScheme) -> list[Ensemble]:
    make = epr_ensemble if s.uniform else general_ensemble
    return [make(s, x) for x in range(1 << s.n)]


def _index(x, n: int) -> int:
    if isinstance(x, (int, np.integer)):
        return int(x)
    return bits_to_int(x if not isinstance(x, str) else [int(c) for c in x])


def absorb_ancilla(schmidt: Sequence[float], k: int) -> np.ndarray:
    """Schmidt vector after treating ``k`` fresh ancilla qubits as shared ``|0>|0>`` pairs."""
    pad = np.zeros(1 << k)
    pad[0] = 1.0
    return np.kron(np.asarray(schmidt, float), pad)


def scheme_protocol(s: EncodingScheme) -> Protocol:
    """The scheme as a one-round protocol for the statevector executor."""
    ea = tuple(range(s.E))
    return Protocol(
        name="encoding", n=s.n, schmidt=s.schmidt,
        rounds=(Round(ALICE, (MessageGate(s.encoders, ea),), ea[s.E - s.m:]),),
    )


def bob_qubits(s: EncodingScheme) -> list[int]:
    """Global indices of Bob's qubits in ensemble order: received, then his half."""
    return list(range(s.E - s.m, s.E)) + list(range(s.E, 2 * s.E))


def superdense_encoder(bits: Sequence[int]) -> np.ndarray:
    """``Z^{b1} X^{b0}`` on each pair's Alice qubit, two message bits per pair."""
    ops = []
    for i in range(0, len(bits), 2):
        b0, b1 = bits[i], bits[i + 1]
        ops.append(np.linalg.matrix_power(gates.Z, b1) @ np.linalg.matrix_power(gates.X, b0))
    return linalg.tensor(*ops)


def superdense_scheme(m: int) -> EncodingScheme:
    if m < 1:
        raise ValueError("superdense coding needs m >= 1")
    enc = np.array([superdense_encoder(int_to_bits(x, 2 * m)) for x in range(1 << 2 * m)])
    return EncodingScheme(E=m, m=m, n=2 * m, encoders=enc)


def superdense_protocol(m: int, name: str = "superdense") -> Protocol:
    """Alice encodes 2m bits on m EPR halves and sends them; Bob does Bell decoding."""
    ea = tuple(range(m))
    eb = tuple(range(m, 2 * m))
    alice, bob = [], []
    for i in range(m):
        alice.append(Gate(gates.X, (ea[i],), 2 * i, "X"))
        alice.append(Gate(gates.Z, (ea[i],), 2 * i + 1, "Z"))
        bob.append(Gate(gates.CNOT, (ea[i], eb[i]), None, "CNOT"))
        bob.append(Gate(gates.H, (ea[i],), None, "H"))
    outputs = tuple(q for i in range(m) for q in (eb[i], ea[i]))
    return Protocol(name, 2 * m, np.full(1 << m, 2.0 ** -m),
                    rounds=(Round(ALICE, tuple(alice), ea), Round(BOB, tuple(bob), ())),
                    outputs=outputs)


_S2 = 1 / np.sqrt(2)
# Bell states indexed by (b0, b1): Phi+, Phi-, Psi+, Psi- (with the sign Z X gives).
_BELL = {
    (0, 0): np.array([_S2, 0, 0, _S2]),
    (0, 1): np.array([_S2, 0, 0, -_S2]),
    (1, 0): np.array([0, _S2, _S2, 0]),
    (1, 1): np.array([0, _S2, -_S2, 0]),
}


def bell_decoder(m: int) -> Povm:
    """Bell-basis measurement on Bob's ``2m`` qubits (received halves first)."""
    # pairs come out interleaved (a0 b0 a1 b1 ...); regroup to (a0 a1 .. b0 b1 ..).
    perm = [2 * i for i in range(m)] + [2 * i + 1 for i in range(m)]
    p = linalg.permutation_unitary(perm)
    elements = []
    for x in range(1 << 2 * m):
        bits = int_to_bits(x, 2 * m)
        v = p @ linalg.tensor(*[_BELL[bits[2 * i], bits[2 * i + 1]] for i in range(m)])
        elements.append(np.outer(v, v.conj()))
    return Povm(tuple(elements))


def pgm_decoder(ensembles: Sequence[Ensemble]) -> Povm:
    """Pretty-good measurement for equiprobable messages, with a reject on the null space."""
    rhos = [e.density() for e in ensembles]
    avg = sum(rhos) / len(rhos)
    w = np.linalg.eigvalsh((avg + avg.conj().T) / 2)
    if w[0] < -TOL.psd:
        raise LinalgError("average state is not PSD")
    root = linalg.pgm_sqrt_inv(avg)
    elements = tuple(root @ (r / len(rhos)) @ root for r in rhos)
    reject = np.eye(avg.shape[0]) - linalg.support_projector(avg)
    return Povm(elements, reject)


def helstrom_decoder(rho0: np.ndarray, rho1: np.ndarray) -> Povm:
    """Optimal two-outcome measurement for equal priors."""
    diff = rho0 - rho1
    w, v = np.linalg.eigh((diff + diff.conj().T) / 2)
    pos = v[:, w > 0]
    p0 = pos @ pos.conj().T
    return Povm((p0, np.eye(rho0.shape[0]) - p0))


def helstrom_success(rho0: np.ndarray, rho1: np.ndarray) -> float:
    return 0.5 + 0.25 * linalg.trace_norm(rho0 - rho1)


def decode_success(ensembles: Sequence[Ensemble], d: Povm) -> float:
    """Average probability that outcome ``y`` equals the encoded message."""
    if len(d.elements) != len(ensembles):
        raise LinalgError(f"{len(d.elements)} outcomes for {len(ensembles)} messages")
    total = 0.0
    for e, p in zip(ensembles, d.elements):
        if p.shape[0] != e.states.shape[1]:
            raise LinalgError("decoder and ensemble dimensions differ")
        total += float(np.real(np.einsum("l,li,ij,lj->", e.weights, e.states.conj(),
                                         p, e.states)))
    return total / len(ensembles)


def bound_rhs(n: int, m_A: int) -> float:
    """``2^{2 m_A} / 2^n`` capped at 1."""
    if n < 0 or m_A < 0:
        raise ValueError("n and m_A must be non-negative")
    return min(1.0, 2.0 ** (2 * m_A - n))


@dataclass(frozen=True)
class BoundReport:
    success: float
    rhs: float
    margin: float
    tight: bool

    @property
    def holds(self) -> bool:
        return self.margin >= -TOL.bound


def bound_report(success: float, n: int, m_A: int) -> BoundReport:
    rhs = bound_rhs(n, m_A)
    margin = rhs - success
    return BoundReport(success, rhs, margin, margin <= TOL.tight)


def check_encoding_bound(s: EncodingScheme, d: Povm | None = None) -> BoundReport:
    """Success of decoder ``d`` (PGM by default) against the ``4^m / 2^n`` bound."""
    ens = scheme_ensembles(s)
    if d is None:
        d = pgm_decoder(ens)
    return bound_report(decode_success(ens, d), s.n, s.m)


def protocol_ensembles(p: Protocol) -> list[Ensemble]:
    """Bob's final mixed state for every message, read off the certificate."""
    out = []
    for x in messages(p.n):
        c, _ = certify_protocol(p, x)
        states = c.bob_states()
        out.append(Ensemble(np.ones(len(states)), states))
    return out
