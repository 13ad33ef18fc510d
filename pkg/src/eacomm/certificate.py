"""Round-by-round state-form certificates for interactive protocols.

At every stage of a protocol without prior entanglement the joint state can be
written as ``sum_a |a>_A  Lam |phi_a>_B`` where the ``phi_a`` are orthonormal,
``Lam`` is built from Bob's unitaries alone, and
``Tr(Lam Lam^dag) = 4 ** m_A``. This module maintains that pair through Alice
rounds and Bob rounds and checks it against the statevector executor.

A protocol that starts from a shared entangled state is rewritten so that Bob
prepares the whole state himself and ships Alice's half to her first; that
opening round counts towards ``m_B`` only.

Bookkeeping: ``alice`` and ``bob`` hold the global qubit indices in the order
the certificate uses for the two parties' registers. A sent block is moved to
Alice's right end (Bob's left end) by a permutation folded into the actor's
unitary. The domain of ``Lam`` starts at ``max(q_A, q_B)`` qubits and grows by
one qubit per qubit sent in either direction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import linalg
from .config import MAX_QUBITS, TOL
from .linalg import LinalgError
from .model import (ALICE, BOB, Gate, Protocol, ProtocolError, as_bits, check_cap,
                    entangled_state, trajectory)

# Above this many domain qubits the lifted unitary is applied through its
# closed-form action on the family instead of being materialized.
EXPLICIT_LIFT_MAX_QUBITS = 10


@dataclass(frozen=True, eq=False)
class Certificate:
    lam: np.ndarray
    phis: np.ndarray
    q_A: int
    q_B: int
    m_A: int = 0
    m_B: int = 0
    alice: tuple[int, ...] = ()
    bob: tuple[int, ...] = ()

    @property
    def domain_qubits(self) -> int:
        return linalg.num_qubits(self.lam.shape[1])

    def trace(self) -> float:
        """``Tr(Lam Lam^dag)``."""
        return float(np.sum(np.abs(self.lam) ** 2))

    def trace_residual(self) -> float:
        target = 4.0 ** self.m_A
        return abs(self.trace() - target) / target

    def gram_deviation(self) -> float:
        return linalg.gram_deviation(self.phis)

    def bob_states(self) -> np.ndarray:
        """Rows ``Lam |phi_a>``: Bob's unnormalized states, indexed by Alice's ``a``."""
        return (self.lam @ self.phis.T).T

    def joint(self) -> np.ndarray:
        """Joint vector with Alice's qubits first, each side in certificate order."""
        return self.bob_states().reshape(-1)

    def reconstruct(self) -> np.ndarray:
        """Joint vector in the executor's global qubit order."""
        order = list(self.alice) + list(self.bob)
        k = len(order)
        if k != self.q_A + self.q_B:
            raise ValueError("certificate carries no qubit labels")
        t = self.joint().reshape((2,) * k) if k else self.joint()
        if k:
            t = np.transpose(t, np.argsort(order)).reshape(-1)
        return t


def lift_alice_unitary(u: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Unitary ``Ut`` on the phis' space with ``<phi_a|Ut|phi_b> = <b|u|a>``.

    ``phis`` holds the orthonormal family as rows. ``Ut`` is
    ``Phi u^T Phi^dag`` on the span of the family and the identity on its
    complement.
    """
    u = np.asarray(u, dtype=complex)
    phis = np.atleast_2d(np.asarray(phis, dtype=complex))
    if not linalg.is_unitary(u):
        raise LinalgError("lift_alice_unitary: u is not unitary")
    if phis.shape[0] != u.shape[0] or phis.shape[0] > phis.shape[1]:
        raise LinalgError(
            f"need {u.shape[0]} phis of dimension >= {u.shape[0]}, got {phis.shape}")
    if linalg.gram_deviation(phis) > TOL.orthonormal:
        raise LinalgError("lift_alice_unitary: phis are not orthonormal")
    cols = phis.T
    proj = cols @ cols.conj().T
    return cols @ u.T @ cols.conj().T + (np.eye(phis.shape[1]) - proj)


def init_certificate(q_A: int, q_B: int, alice: Sequence[int] = (),
                     bob: Sequence[int] = ()) -> Certificate:
    """``Lam = |0><0|`` and ``phi_a = |a>``: the all-zeros starting state."""
    d0 = max(q_A, q_B)
    lam = np.zeros((1 << q_B, 1 << d0), dtype=complex)
    lam[0, 0] = 1.0
    phis = np.eye(1 << q_A, 1 << d0, dtype=complex)
    return Certificate(lam, phis, q_A, q_B, 0, 0, tuple(alice), tuple(bob))


def step_alice(c: Certificate, u: np.ndarray, p: int,
               order: Sequence[int] | None = None) -> Certificate:
    """Alice applies ``u`` to all her qubits, then sends her rightmost ``p``.

    ``order`` relabels Alice's register after ``u`` (used when ``u`` contains
    a permutation); it defaults to the current labels.
    """
    if not 0 <= p <= c.q_A:
        raise ProtocolError(f"Alice holds {c.q_A} qubits, cannot send {p}")
    if u.shape != (1 << c.q_A, 1 << c.q_A):
        raise LinalgError(f"Alice's unitary must act on {c.q_A} qubits")
    if c.domain_qubits <= EXPLICIT_LIFT_MAX_QUBITS:
        lifted = c.phis @ lift_alice_unitary(u, c.phis).T
    else:
        lifted = u @ c.phis
    keep = c.q_A - p
    phis = lifted.reshape(1 << keep, -1) / np.sqrt(2.0 ** p)
    lam = np.sqrt(2.0 ** p) * np.kron(np.eye(1 << p), c.lam)
    order = tuple(c.alice if order is None else order)
    return Certificate(lam, phis, keep, c.q_B + p, c.m_A + p, c.m_B,
                       order[:keep], order[keep:] + c.bob)


def step_bob(c: Certificate, v: np.ndarray, p: int,
             order: Sequence[int] | None = None) -> Certificate:
    """Bob applies ``v`` to all his qubits, then sends his leftmost ``p``."""
    if not 0 <= p <= c.q_B:
        raise ProtocolError(f"Bob holds {c.q_B} qubits, cannot send {p}")
    if v.shape != (1 << c.q_B, 1 << c.q_B):
        raise LinalgError(f"Bob's unitary must act on {c.q_B} qubits")
    dom = c.lam.shape[1]
    t = (v @ c.lam).reshape(1 << p, 1 << (c.q_B - p), dom)
    lam = np.transpose(t, (1, 0, 2)).reshape(1 << (c.q_B - p), (1 << p) * dom)
    # phi_{a l} = |l> |phi_a>; built without looking at v.
    phis = np.einsum("lm,ad->almd", np.eye(1 << p), c.phis).reshape(
        c.phis.shape[0] << p, (1 << p) * dom)
    order = tuple(c.bob if order is None else order)
    return Certificate(lam, phis, c.q_A + p, c.q_B - p, c.m_A, c.m_B + p,
                       c.alice + order[:p], order[p:])


def _round_unitary(gates, order: Sequence[int], x, send: Sequence[int],
                   front: bool) -> tuple[np.ndarray, tuple[int, ...]]:
    """Actor's full unitary with sent qubits permuted to one end."""
    order = list(order)
    pos = {q: i for i, q in enumerate(order)}
    k = len(order)
    u = np.eye(1 << k, dtype=complex)
    for g in gates:
        m = g.resolve(x)
        if m is not None:
            u = linalg.apply_on(m, [pos[q] for q in g.targets], u)
    rest = [q for q in order if q not in send]
    new = list(send) + rest if front else rest + list(send)
    if new != order:
        u = linalg.permutation_unitary([pos[q] for q in new]) @ u
    return u, tuple(new)


def preparation_unitary(schmidt: np.ndarray) -> np.ndarray:
    """Unitary taking ``|0...0>`` on 2E qubits to the shared entangled state."""
    return linalg.complete_to_unitary(entangled_state(schmidt))


def certify_prefixes(p: Protocol, x, cap: int = MAX_QUBITS) -> list[tuple[Certificate, float]]:
    """Certificate and reconstruction residual after each round prefix.

    Entry ``t`` matches the executor state after ``t`` rounds.
    """
    x = as_bits(x, p.n)
    check_cap(p.num_qubits, cap)
    states = trajectory(p, x, cap)
    owners = states[0].ledger.owners
    ea = p.qubits("ea") if p.E else ()
    alice0 = [q for q, o in enumerate(owners) if o == ALICE and q not in ea]
    bob0 = sorted([q for q, o in enumerate(owners) if o == BOB] + list(ea))
    c = init_certificate(len(alice0), len(bob0), alice0, bob0)
    if p.E:
        w = linalg.embed(preparation_unitary(p.schmidt), range(2 * p.E), c.q_B)
        c = step_bob(c, w, p.E)

    def residual(c, s):
        return float(np.max(np.abs(c.reconstruct() - s.vec)))

    out = [(c, residual(c, states[0]))]
    for r, s in zip(p.rounds, states[1:]):
        # The executor already enforced ownership; trajectory() raised otherwise.
        if r.actor == ALICE:
            u, order = _round_unitary(r.gates, c.alice, x, r.send, front=False)
            c = step_alice(c, u, len(r.send), order)
        elif r.actor == BOB:
            v, order = _round_unitary(r.gates, c.bob, x, r.send, front=True)
            c = step_bob(c, v, len(r.send), order)
        out.append((c, residual(c, s)))
    return out


def certify_protocol(p: Protocol, x, cap: int = MAX_QUBITS) -> tuple[Certificate, float]:
    """Final certificate and the worst reconstruction residual over all prefixes."""
    runs = certify_prefixes(p, x, cap)
    return runs[-1][0], max(r for _, r in runs)


def bob_ensemble(c: Certificate) -> tuple[np.ndarray, np.ndarray]:
    """Bob's final mixed state as weights and normalized states (qubits in ``c.bob`` order).

    Obtained as if Alice measured her qubits in the computational basis.
    """
    states = c.bob_states()
    w = np.sum(np.abs(states) ** 2, axis=1)
    keep = w > 1e-15
    return w[keep], states[keep] / np.sqrt(w[keep])[:, None]


def replace_alice_unitaries(p: Protocol, seed: int) -> Protocol:
    """Same protocol with every Alice gate swapped for a random unitary of equal size."""
    rng = np.random.default_rng(seed)
    rounds = []
    for r in p.rounds:
        if r.actor == ALICE:
            gates = tuple(Gate(linalg.random_unitary(len(g.targets), int(rng.integers(2**31))),
                               tuple(g.targets)) for g in r.gates)
            r = replace(r, gates=gates)
        rounds.append(r)
    return replace(p, rounds=tuple(rounds))
