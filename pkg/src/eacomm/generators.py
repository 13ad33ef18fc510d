"""Seeded random protocols, encoding schemes and orthonormal families for tests."""

from __future__ import annotations

import numpy as np

from . import gates, linalg
from .coding import EncodingScheme
from .model import ALICE, BOB, Gate, Protocol, Register, Round, other


def _seed(rng: np.random.Generator) -> int:
    return int(rng.integers(2 ** 31))


def random_orthonormal(rows: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """``rows`` orthonormal vectors on ``k`` qubits, as rows."""
    d = 1 << k
    if rows > d:
        raise ValueError(f"cannot fit {rows} orthonormal vectors in dimension {d}")
    z = rng.standard_normal((d, rows)) + 1j * rng.standard_normal((d, rows))
    q, _ = np.linalg.qr(z)
    return q.T


def random_scheme(seed: int, E: int, m: int, n: int, uniform: bool = True) -> EncodingScheme:
    rng = np.random.default_rng(seed)
    enc = np.array([linalg.random_unitary(E, _seed(rng)) for _ in range(1 << n)])
    lam = None
    if not uniform:
        lam = rng.dirichlet(np.ones(1 << E) * 0.7)
    return EncodingScheme(E, m, n, enc, lam)


def _split(total: int, parts: int, rng: np.random.Generator) -> list[int]:
    if parts == 0:
        return []
    cuts = np.sort(rng.integers(0, total + 1, size=parts - 1))
    return list(np.diff(np.concatenate([[0], cuts, [total]])).astype(int))


def _local_gates(held: list[int], rng: np.random.Generator, structured: bool) -> list[Gate]:
    out = []
    if not held:
        return out
    if len(held) >= 2:
        pair = tuple(int(q) for q in rng.choice(held, 2, replace=False))
        if structured:
            out.append(Gate(gates.CNOT, pair, None, "CNOT"))
        else:
            out.append(Gate(linalg.random_unitary(2, _seed(rng)), pair))
    q = int(rng.choice(held))
    if structured:
        out.append(Gate(gates.H, (q,), None, "H"))
    else:
        out.append(Gate(linalg.random_unitary(1, _seed(rng)), (q,)))
    return out


def random_protocol(seed: int, n: int = 2, m_A: int = 1, m_B: int = 1, rounds: int = 3,
                    E: int | None = None, max_qubits: int = 8,
                    structured: bool | None = None, schmidt: str = "epr") -> Protocol:
    """A random interactive protocol with exactly ``m_A``/``m_B`` qubits sent each way.

    Alice's rounds carry one gate per message bit conditioned on that bit.
    ``structured`` protocols use X/Z encodings and Clifford gates, which tend
    to land near the bound; unstructured ones use Haar-random gates.
    ``schmidt`` is ``"epr"`` or ``"random"`` (Dirichlet coefficients).
    """
    rng = np.random.default_rng(seed)
    if structured is None:
        structured = bool(rng.integers(2))
    first = ALICE if rng.integers(2) else BOB
    if rounds == 0 and (m_A or m_B):
        raise ValueError("sends requested but no rounds")
    if rounds == 1:
        if m_A and m_B:
            raise ValueError("a single round cannot send both ways")
        first = ALICE if m_A else BOB if m_B else first
    actors = [first if i % 2 == 0 else other(first) for i in range(rounds)]
    a_sends = iter(_split(m_A, actors.count(ALICE), rng))
    b_sends = iter(_split(m_B, actors.count(BOB), rng))

    if E is None:
        E = int(rng.integers(0, 3))
    while True:
        a_work = max(m_A - E, 1 - E, 0)
        b_work = max(n + m_B - m_A - E, m_B - E, 0)
        if 2 * E + a_work + b_work <= max_qubits or E == 0:
            break
        E -= 1
    spare = max_qubits - (2 * E + a_work + b_work)
    extra = int(rng.integers(0, spare + 1)) if spare > 0 else 0
    a_extra = int(rng.integers(0, extra + 1))
    a_work += a_extra
    b_work += extra - a_extra
    if 2 * E + a_work + b_work > max_qubits:
        raise ValueError("requested protocol does not fit in max_qubits")

    if schmidt == "random" and E:
        lam = rng.dirichlet(np.ones(1 << E) * 0.7)
    else:
        lam = np.full(1 << E, 2.0 ** -E)
    regs = []
    if a_work:
        regs.append(Register("wa", ALICE, a_work))
    if b_work:
        regs.append(Register("wb", BOB, b_work))
    proto = Protocol("random", n, lam, tuple(regs))
    owners = list(proto.initial_ledger().owners)

    out_rounds = []
    for actor in actors:
        held = [q for q, o in enumerate(owners) if o == actor]
        gl = []
        if actor == ALICE:
            for i in range(n):
                if structured:
                    g = gates.X if rng.integers(2) else gates.Z
                    gl.append(Gate(g, (int(rng.choice(held)),), i, "X" if g is gates.X else "Z"))
                else:
                    k = 2 if len(held) >= 2 and rng.integers(2) else 1
                    tg = tuple(int(q) for q in rng.choice(held, k, replace=False))
                    gl.append(Gate(linalg.random_unitary(k, _seed(rng)), tg, i))
        gl += _local_gates(held, rng, structured)
        k = next(a_sends) if actor == ALICE else next(b_sends)
        send = tuple(int(q) for q in rng.choice(held, k, replace=False)) if k else ()
        for q in send:
            owners[q] = other(actor)
        out_rounds.append(Round(actor, tuple(gl), send))

    bob_held = [q for q, o in enumerate(owners) if o == BOB]
    outputs = tuple(int(q) for q in rng.choice(bob_held, n, replace=False))
    return Protocol(f"random_{seed}", n, lam, tuple(regs), tuple(out_rounds), outputs)
