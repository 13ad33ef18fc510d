"""Two-party protocols in the Yao model, simulated exactly on a statevector.

The joint pure state covers every qubit either party ever touches. A round is
one local unitary by the acting party followed by a transfer of some of its
qubits; the transfer only rewrites the ownership ledger and never touches the
amplitudes. Alice's classical input enters through gates conditioned on
message bits. Bob measures his output qubits in the computational basis at the
end; there are no intermediate measurements.

Qubit layout: the Alice half of the shared state (register ``ea``), Bob's half
(``eb``), then the declared registers in order.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from . import linalg
from .config import MAX_QUBITS, TOL

ALICE = "alice"
BOB = "bob"
PARTIES = (ALICE, BOB)

ROLES = ("entanglement", "work", "input", "output")


class ProtocolError(ValueError):
    """A round or protocol breaks the rules of the communication model."""


class CapExceeded(RuntimeError):
    """The simulation would need more live qubits than the configured cap."""


def other(party: str) -> str:
    return BOB if party == ALICE else ALICE


def as_bits(x: Union[str, Sequence[int]], n: int | None = None) -> tuple[int, ...]:
    if isinstance(x, str):
        bits = tuple(int(c) for c in x)
    else:
        bits = tuple(int(b) for b in x)
    if any(b not in (0, 1) for b in bits):
        raise ProtocolError(f"message {x!r} is not a bit string")
    if n is not None and len(bits) != n:
        raise ProtocolError(f"message has {len(bits)} bits, protocol expects {n}")
    return bits


def bits_to_int(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def int_to_bits(v: int, n: int) -> tuple[int, ...]:
    return tuple((v >> (n - 1 - i)) & 1 for i in range(n))


def messages(n: int) -> Iterator[tuple[int, ...]]:
    return itertools.product((0, 1), repeat=n)


@dataclass(frozen=True)
class Register:
    name: str
    owner: str
    size: int
    role: str = "work"


@dataclass(frozen=True, eq=False)
class Gate:
    """A fixed unitary on global qubit indices, optionally fired by one message bit."""

    matrix: np.ndarray
    targets: tuple[int, ...]
    control: int | None = None
    name: str | None = None

    def resolve(self, x: Sequence[int]) -> np.ndarray | None:
        if self.control is not None and not x[self.control]:
            return None
        return self.matrix

    @property
    def reads_input(self) -> bool:
        return self.control is not None


@dataclass(frozen=True, eq=False)
class MessageGate:
    """A unitary looked up by the whole message: ``table[int(x)]``."""

    table: np.ndarray
    targets: tuple[int, ...]

    def resolve(self, x: Sequence[int]) -> np.ndarray:
        return self.table[bits_to_int(x)]

    @property
    def reads_input(self) -> bool:
        return True


@dataclass(frozen=True)
class Round:
    actor: str
    gates: tuple = ()
    send: tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class Protocol:
    name: str
    n: int
    schmidt: np.ndarray
    registers: tuple[Register, ...] = ()
    rounds: tuple[Round, ...] = ()
    outputs: tuple[int, ...] = ()

    def __post_init__(self):
        lam = np.asarray(self.schmidt, dtype=float)
        object.__setattr__(self, "schmidt", lam)
        if lam.ndim != 1 or lam.size == 0 or lam.size & (lam.size - 1):
            raise ProtocolError(
                f"{lam.size} Schmidt coefficients; need a power of two")
        if np.any(lam < 0) or abs(lam.sum() - 1.0) > TOL.norm:
            raise ProtocolError(
                f"Schmidt coefficients must be non-negative and sum to 1 (sum {lam.sum():.12g})")
        names = [r.name for r in self.layout]
        if len(set(names)) != len(names):
            raise ProtocolError(f"duplicate register names in {names}")

    @property
    def E(self) -> int:
        return linalg.num_qubits(self.schmidt.size)

    @property
    def layout(self) -> tuple[Register, ...]:
        ent = ()
        if self.E:
            ent = (Register("ea", ALICE, self.E, "entanglement"),
                   Register("eb", BOB, self.E, "entanglement"))
        return ent + tuple(self.registers)

    @property
    def num_qubits(self) -> int:
        return sum(r.size for r in self.layout)

    def qubits(self, name: str) -> tuple[int, ...]:
        off = 0
        for r in self.layout:
            if r.name == name:
                return tuple(range(off, off + r.size))
            off += r.size
        raise KeyError(name)

    def qubit(self, name: str, i: int) -> int:
        return self.qubits(name)[i]

    def initial_ledger(self) -> "Ledger":
        owners, roles = [], []
        for r in self.layout:
            owners += [r.owner] * r.size
            roles += [r.role] * r.size
        for q in self.outputs:
            if roles[q] == "work":
                roles[q] = "output"
        return Ledger(tuple(owners), tuple(roles))

    @property
    def m_A(self) -> int:
        return sum(len(r.send) for r in self.rounds if r.actor == ALICE)

    @property
    def m_B(self) -> int:
        return sum(len(r.send) for r in self.rounds if r.actor == BOB)


@dataclass(frozen=True)
class Ledger:
    owners: tuple[str, ...]
    roles: tuple[str, ...]
    m_A: int = 0
    m_B: int = 0

    @property
    def q_A(self) -> int:
        return self.owners.count(ALICE)

    @property
    def q_B(self) -> int:
        return self.owners.count(BOB)

    def held_by(self, party: str) -> tuple[int, ...]:
        return tuple(q for q, o in enumerate(self.owners) if o == party)

    def transfer(self, qubits: Iterable[int], actor: str) -> "Ledger":
        qubits = tuple(qubits)
        owners = list(self.owners)
        for q in qubits:
            if owners[q] != actor:
                raise ProtocolError(f"{actor} cannot send qubit {q}: held by {owners[q]}")
            owners[q] = other(actor)
        sent = len(qubits)
        if actor == ALICE:
            return replace(self, owners=tuple(owners), m_A=self.m_A + sent)
        return replace(self, owners=tuple(owners), m_B=self.m_B + sent)


@dataclass(frozen=True, eq=False)
class JointState:
    vec: np.ndarray
    ledger: Ledger = field(repr=False)

    @property
    def num_qubits(self) -> int:
        return len(self.ledger.owners)


def entangled_state(schmidt: np.ndarray) -> np.ndarray:
    """``sum_a sqrt(lambda_a) |a>_A |a>_B`` on 2E qubits."""
    lam = np.asarray(schmidt, dtype=float)
    d = lam.size
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * d + np.arange(d)] = np.sqrt(lam)
    return psi


def check_cap(k: int, cap: int = MAX_QUBITS) -> None:
    if k > cap:
        raise CapExceeded(f"{k} live qubits exceeds the cap of {cap}")


def initial_state(p: Protocol, cap: int = MAX_QUBITS) -> JointState:
    k = p.num_qubits
    check_cap(k, cap)
    rest = linalg.basis_state(0, k - 2 * p.E)
    return JointState(linalg.tensor(entangled_state(p.schmidt), rest), p.initial_ledger())


def execute_round(s: JointState, r: Round, x: Sequence[int]) -> JointState:
    if r.actor not in PARTIES:
        raise ProtocolError(f"unknown actor {r.actor!r}")
    vec = s.vec
    owners = s.ledger.owners
    for g in r.gates:
        bad = [q for q in g.targets if owners[q] != r.actor]
        if bad:
            raise ProtocolError(f"{r.actor} applies a gate on qubits {bad} it does not hold")
        if r.actor == BOB and g.reads_input:
            raise ProtocolError("input-conditioned gate by Bob")
        u = g.resolve(x)
        if u is not None:
            vec = linalg.apply_on(u, g.targets, vec)
    return JointState(vec, s.ledger.transfer(r.send, r.actor))


def trajectory(p: Protocol, x: Union[str, Sequence[int]],
               cap: int = MAX_QUBITS) -> list[JointState]:
    """States after 0, 1, ..., len(rounds) rounds."""
    x = as_bits(x, p.n)
    states = [initial_state(p, cap)]
    for r in p.rounds:
        states.append(execute_round(states[-1], r, x))
    return states


def run_protocol(p: Protocol, x: Union[str, Sequence[int]],
                 cap: int = MAX_QUBITS) -> JointState:
    x = as_bits(x, p.n)
    s = initial_state(p, cap)
    for r in p.rounds:
        s = execute_round(s, r, x)
    return s


def output_distribution(s: JointState, outputs: Sequence[int]) -> np.ndarray:
    """Born-rule distribution of the outputs; ``outputs[0]`` is the leading bit."""
    outputs = list(outputs)
    for q in outputs:
        if s.ledger.owners[q] != BOB:
            raise ProtocolError(f"output qubit {q} is not held by Bob")
    k = s.num_qubits
    probs = np.abs(s.vec.reshape((2,) * k)) ** 2
    rest = [q for q in range(k) if q not in outputs]
    probs = np.transpose(probs, outputs + rest).reshape(1 << len(outputs), -1)
    return probs.sum(axis=1)


def success_probability(p: Protocol, threads: int = 1, cap: int = MAX_QUBITS) -> float:
    """Exact Pr[Y = X] for a uniformly random message X."""
    if len(p.outputs) != p.n:
        raise ProtocolError(f"{len(p.outputs)} output qubits for an {p.n}-bit message")
    check_cap(p.num_qubits, cap)

    def hit(x):
        return output_distribution(run_protocol(p, x, cap), p.outputs)[bits_to_int(x)]

    xs = list(messages(p.n))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            vals = list(pool.map(hit, xs))
    else:
        vals = [hit(x) for x in xs]
    return float(np.sum(vals) / len(xs))


def per_message_success(p: Protocol, cap: int = MAX_QUBITS) -> np.ndarray:
    return np.array([
        output_distribution(run_protocol(p, x, cap), p.outputs)[bits_to_int(x)]
        for x in messages(p.n)
    ])
