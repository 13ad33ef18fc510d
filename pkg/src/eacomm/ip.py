"""Inner Product: public-coin and superdense-coded protocols, and the
compilation of a coherent IP protocol into a message-transmission protocol.

The classical protocol: public coins give ``r`` in {0,1}^t and a guess bit
``g``. Alice sends the first ``n - t`` bits of ``x`` and one flag bit saying
whether the last ``t`` bits of ``x`` equal ``r``. Bob outputs the inner
product of the prefixes, plus ``<r, y_suffix>`` if the flag is set and ``g``
otherwise. Every input pair succeeds with probability ``1/2 + 2^{-t-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import gates, linalg
from .coding import superdense_protocol
from .config import TOL
from .model import (ALICE, BOB, Gate, MessageGate, Protocol, ProtocolError, Register,
                    Round, as_bits, bits_to_int, messages, other, output_distribution,
                    run_protocol, success_probability)


class NotCleanError(ProtocolError):
    """The IP protocol disturbs Bob's input register or never hands him the answer."""


def ip_value(x: Sequence[int], y: Sequence[int]) -> int:
    x, y = as_bits(x), as_bits(y)
    if len(x) != len(y):
        raise ValueError("x and y must have the same length")
    return sum(a & b for a, b in zip(x, y)) & 1


def _check_t(n: int, t: int) -> None:
    if n < 1 or not 0 <= t <= n:
        raise ValueError(f"need 0 <= t <= n and n >= 1 (got n={n}, t={t})")


def _classical_answer(x, y, r, g, t) -> int:
    cut = len(x) - t
    flag = tuple(x[cut:]) == tuple(r)
    head = ip_value(x[:cut], y[:cut]) if cut else 0
    return head ^ (ip_value(r, y[cut:]) if flag else g)


@dataclass(frozen=True)
class ClassicalIpResult:
    n: int
    t: int
    bits: int
    min_success: Fraction
    max_success: Fraction


def classical_ip_protocol(n: int, t: int) -> ClassicalIpResult:
    """Exact worst- and best-case success over all inputs, by enumerating the coins."""
    _check_t(n, t)
    coins = [(r, g) for r in messages(t) for g in (0, 1)]
    lo, hi = Fraction(1), Fraction(0)
    for x in messages(n):
        for y in messages(n):
            f = ip_value(x, y)
            hits = sum(_classical_answer(x, y, r, g, t) == f for r, g in coins)
            p = Fraction(hits, len(coins))
            lo, hi = min(lo, p), max(hi, p)
    return ClassicalIpResult(n, t, n - t + 1, lo, hi)


def epsilon_for_t(t: int) -> float:
    return 0.5 - 2.0 ** (-t - 1)


def t_for_epsilon(eps: float) -> int:
    """Largest integer ``t`` whose protocol errs with probability at most ``eps``."""
    if not 0 <= eps < 0.5:
        raise ValueError("epsilon must lie in [0, 1/2)")
    return int(math.floor(math.log2(1 / (1 - 2 * eps)) + 1e-12))


def ip_lower_bound(n: int, eps: float) -> float:
    """Qubits any entanglement-assisted protocol needs for IP_n with error ``eps``."""
    if not 0 <= eps < 0.5:
        raise ValueError("epsilon must lie in [0, 1/2)")
    return 0.5 * (n - math.log2(1 / (1 - 2 * eps) ** 2))


@dataclass(frozen=True)
class IpProtocolReport:
    n: int
    epsilon_target: float
    t: int
    classical_bits: int
    quantum_qubits: int
    success_exact: float
    lower_bound_qubits: float
    padded: bool

    @property
    def upper_bound_formula(self) -> float:
        return 0.5 * (self.n - self.t + 1)


@lru_cache(maxsize=None)
def _superdense_decode(k: int, bits: tuple[int, ...]) -> np.ndarray:
    p = superdense_protocol(k // 2)
    return output_distribution(run_protocol(p, bits), p.outputs)


def quantum_ip_protocol(n: int, t: int) -> IpProtocolReport:
    """The classical protocol with Alice's message carried by superdense coding.

    Each message is actually sent through the simulated superdense protocol and
    Bob's answer is computed from what he decodes.
    """
    _check_t(n, t)
    k = n - t + 1
    padded = k % 2 == 1
    k_even = k + padded
    cut = n - t
    coins = [(r, g) for r in messages(t) for g in (0, 1)]
    worst = 1.0
    for x in messages(n):
        for y in messages(n):
            f = ip_value(x, y)
            total = 0.0
            for r, g in coins:
                flag = int(tuple(x[cut:]) == r)
                msg = tuple(x[:cut]) + (flag,) + (0,) * padded
                dist = _superdense_decode(k_even, msg)
                for idx in np.flatnonzero(dist > 1e-15):
                    got = [(idx >> (k_even - 1 - i)) & 1 for i in range(k_even)]
                    head = ip_value(got[:cut], y[:cut]) if cut else 0
                    ans = head ^ (ip_value(r, y[cut:]) if got[cut] else g)
                    total += dist[idx] * (ans == f)
            worst = min(worst, total / len(coins))
    return IpProtocolReport(n, epsilon_for_t(t), t, k, k_even // 2, worst,
                            ip_lower_bound(n, epsilon_for_t(t)), padded)


@dataclass(frozen=True, eq=False)
class IpCircuit:
    """A coin-free IP protocol: Alice's input is the message, Bob's ``y`` is a qubit register."""

    protocol: Protocol
    answer: int
    y: tuple[int, ...]


def trivial_ip_protocol(n: int, eps: float = 0.0) -> IpCircuit:
    """Alice sends x; Bob XORs each ``x_i AND y_i`` into his answer qubit.

    With ``eps > 0`` Bob finally rotates the answer so that it is right with
    probability exactly ``1 - eps`` on every input.
    """
    if not 0 <= eps < 0.5:
        raise ValueError("epsilon must lie in [0, 1/2)")
    regs = (Register("xa", ALICE, n), Register("y", BOB, n, "input"),
            Register("ans", BOB, 1, "output"))
    p = Protocol(f"ip_trivial_{n}", n, [1.0], regs)
    xa, y, ans = p.qubits("xa"), p.qubits("y"), p.qubit("ans", 0)
    alice = tuple(Gate(gates.X, (xa[i],), i, "X") for i in range(n))
    bob = [Gate(gates.toffoli(), (xa[i], y[i], ans)) for i in range(n)]
    if eps > 0:
        bob.append(Gate(gates.ry(2 * math.asin(math.sqrt(eps))), (ans,)))
    rounds = (Round(ALICE, alice, xa), Round(BOB, tuple(bob), ()))
    return IpCircuit(replace(p, rounds=rounds, outputs=(ans,)), ans, y)


def _with_input_y(c: IpCircuit, y: Sequence[int]) -> Protocol:
    prep = Round(BOB, tuple(Gate(gates.X, (q,), None, "X") for q, b in zip(c.y, y) if b), ())
    return replace(c.protocol, rounds=(prep,) + c.protocol.rounds)


def ip_input_success(c: IpCircuit, x, y) -> float:
    """Probability the answer qubit reads ``IP(x, y)`` for basis input ``y``."""
    p = _with_input_y(c, y)
    dist = output_distribution(run_protocol(p, x), (c.answer,))
    return float(dist[ip_value(x, y)])


def _inverse_gate(g):
    if isinstance(g, MessageGate):
        return MessageGate(np.conj(np.transpose(g.table, (0, 2, 1))), g.targets)
    return Gate(g.matrix.conj().T, g.targets, g.control, g.name)


def _compact(rounds: list[Round]) -> tuple[Round, ...]:
    """Merge a send-free round into the following round of the same actor."""
    out: list[Round] = []
    for r in rounds:
        if not r.gates and not r.send:
            continue
        if out and out[-1].actor == r.actor and not out[-1].send:
            r = Round(r.actor, out[-1].gates + r.gates, r.send)
            out.pop()
        out.append(r)
    return tuple(out)


def _check_clean(c: IpCircuit) -> None:
    p = c.protocol
    start = p.initial_ledger()
    if any(start.owners[q] != BOB for q in c.y + (c.answer,)):
        raise NotCleanError("y register and answer qubit must start with Bob")
    for x in messages(p.n):
        for y in messages(len(c.y)):
            s = run_protocol(_with_input_y(c, y), x)
            if s.ledger.owners[c.answer] != BOB or any(s.ledger.owners[q] != BOB for q in c.y):
                raise NotCleanError("answer qubit or y register is not with Bob at the end")
            # y must come back untouched for every basis input.
            rho = linalg.partial_trace(s.vec, c.y)
            if abs(rho[bits_to_int(y), bits_to_int(y)] - 1) > TOL.reconstruction:
                raise NotCleanError(f"protocol modifies Bob's input register (y={y})")


def compile_transmission(c: IpCircuit) -> Protocol:
    """H on y, protocol, Z on the answer, protocol reversed, H on y; Bob outputs y."""
    _check_clean(c)
    p = c.protocol
    had = tuple(Gate(gates.H, (q,), None, "H") for q in c.y)
    rounds = [Round(BOB, had, ())]
    rounds += list(p.rounds)
    rounds.append(Round(BOB, (Gate(gates.Z, (c.answer,), None, "Z"),), ()))
    for r in reversed(p.rounds):
        if r.send:
            rounds.append(Round(other(r.actor), (), r.send))
        rounds.append(Round(r.actor, tuple(_inverse_gate(g) for g in reversed(r.gates)), ()))
    rounds.append(Round(BOB, had, ()))
    return replace(p, name=p.name + "_transmission", rounds=_compact(rounds), outputs=c.y)


def recovery_probabilities(t: Protocol) -> np.ndarray:
    """``Pr[Bob outputs x | x]`` for every message of a transmission protocol."""
    return np.array([output_distribution(run_protocol(t, x), t.outputs)[bits_to_int(x)]
                     for x in messages(t.n)])


def reduce_ip_to_transmission(c: IpCircuit) -> tuple[Protocol, float]:
    """Compiled transmission protocol and its worst-case recovery probability."""
    t = compile_transmission(c)
    return t, float(np.min(recovery_probabilities(t)))


@dataclass(frozen=True)
class ReductionReport:
    n: int
    epsilon: float
    ip_error: float
    recovery_worst: float
    recovery_average: float
    expected: float
    m_A: int
    m_B: int
    ip_m_A: int
    ip_m_B: int


def reduction_report(n: int, eps: float) -> tuple[Protocol, ReductionReport]:
    c = trivial_ip_protocol(n, eps)
    errs = [1 - ip_input_success(c, x, y) for x in messages(n) for y in messages(n)]
    t, worst = reduce_ip_to_transmission(c)
    rep = ReductionReport(n, eps, max(errs), worst, success_probability(t),
                          (1 - 2 * eps) ** 2, t.m_A, t.m_B,
                          c.protocol.m_A, c.protocol.m_B)
    return t, rep
