import numpy as np
import pytest

from eacomm import gates, linalg
from eacomm.coding import superdense_protocol
from eacomm.config import MAX_QUBITS
from eacomm.generators import random_protocol
from eacomm.model import (ALICE, BOB, CapExceeded, Gate, Protocol, ProtocolError, Register,
                          Round, as_bits, bits_to_int, int_to_bits, messages,
                          output_distribution, per_message_success, run_protocol,
                          success_probability, trajectory)


def test_bit_helpers_round_trip():
    assert as_bits("101") == (1, 0, 1)
    assert bits_to_int((1, 0, 1)) == 5
    assert int_to_bits(5, 4) == (0, 1, 0, 1)
    assert list(messages(2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    with pytest.raises(ValueError):
        as_bits("12")
    with pytest.raises(ValueError):
        as_bits("1", 2)


def test_layout_puts_entanglement_first():
    p = Protocol("p", 1, [0.5, 0.5], (Register("w", BOB, 2),))
    assert p.qubits("ea") == (0,) and p.qubits("eb") == (1,) and p.qubits("w") == (2, 3)
    assert p.initial_ledger().owners == (ALICE, BOB, BOB, BOB)


def test_schmidt_must_sum_to_one():
    with pytest.raises(ProtocolError, match="0.9"):
        Protocol("p", 1, [0.5, 0.4])
    with pytest.raises(ProtocolError):
        Protocol("p", 1, [0.2, 0.3, 0.5])


@pytest.mark.parametrize("m", [1, 2, 3])
def test_superdense_decodes_every_message(m):
    p = superdense_protocol(m)
    assert np.allclose(per_message_success(p), 1.0)
    assert p.m_A == m and p.m_B == 0


def test_send_moves_ownership():
    p = superdense_protocol(1)
    s = trajectory(p, "11")
    assert s[0].ledger.owners[0] == ALICE and s[1].ledger.owners[0] == BOB
    assert s[1].ledger.m_A == 1


def test_gate_on_foreign_qubit_rejected():
    p = Protocol("p", 1, [0.5, 0.5], rounds=(Round(ALICE, (Gate(gates.X, (1,)),)),))
    with pytest.raises(ProtocolError, match="does not hold"):
        run_protocol(p, "0")


def test_bob_cannot_read_input():
    p = Protocol("p", 1, [0.5, 0.5], rounds=(Round(BOB, (Gate(gates.X, (1,), 0),)),))
    with pytest.raises(ProtocolError, match="input-conditioned gate by Bob"):
        run_protocol(p, "1")


def test_send_of_foreign_qubit_rejected():
    p = Protocol("p", 1, [0.5, 0.5], rounds=(Round(ALICE, (), (1,)),))
    with pytest.raises(ProtocolError):
        run_protocol(p, "0")


def test_outputs_must_be_held_by_bob():
    p = Protocol("p", 1, [0.5, 0.5], outputs=(0,))
    s = run_protocol(p, "0")
    with pytest.raises(ProtocolError):
        output_distribution(s, p.outputs)


def test_no_communication_gives_uniform_guess():
    # Bob's half of an EPR pair is uniformly random: success exactly 1/2.
    p = Protocol("p", 1, [0.5, 0.5], outputs=(1,))
    assert success_probability(p) == pytest.approx(0.5)


def test_cap_is_enforced():
    p = Protocol("big", 0, [1.0], (Register("w", BOB, MAX_QUBITS + 1),))
    with pytest.raises(CapExceeded):
        run_protocol(p, ())


def test_threads_do_not_change_results():
    p = random_protocol(5, n=3, m_A=1, m_B=1)
    assert success_probability(p, threads=4) == success_probability(p)


def test_executor_agrees_with_dense_matrix_product():
    p = random_protocol(9, n=2, m_A=2, m_B=1, structured=False)
    x = (1, 0)
    psi = trajectory(p, x)[0].vec
    for r in p.rounds:
        for g in r.gates:
            u = g.resolve(x)
            if u is not None:
                psi = linalg.embed(u, g.targets, p.num_qubits) @ psi
    assert np.allclose(psi, run_protocol(p, x).vec)


def test_random_protocol_has_requested_counts():
    for seed in range(20):
        p = random_protocol(seed, n=3, m_A=2, m_B=3, rounds=3, max_qubits=10)
        assert (p.m_A, p.m_B) == (2, 3)
        assert p.num_qubits <= 10
        run_protocol(p, "010")


# Frozen operation examples.

from eacomm.model import JointState, entangled_state, execute_round, initial_state  # noqa: E402

S2 = 1 / np.sqrt(2)


def test_entangled_state_examples():
    assert np.array_equal(entangled_state([1.0]), [1.0])
    assert np.allclose(entangled_state([0.5, 0.5]), [S2, 0, 0, S2])
    psi = entangled_state([0.7, 0.3])
    assert np.allclose(psi, [np.sqrt(0.7), 0, 0, np.sqrt(0.3)])
    assert np.linalg.norm(psi) == pytest.approx(1)


def test_execute_round_examples():
    p = superdense_protocol(1)
    s = initial_state(p)
    same = execute_round(s, Round(ALICE, (Gate(gates.I, (0,)),)), (0, 0))
    assert np.array_equal(same.vec, s.vec) and same.ledger == s.ledger
    sent = execute_round(s, Round(ALICE, (), (0,)), (0, 0))
    assert np.array_equal(sent.vec, s.vec)
    assert sent.ledger.owners[0] == BOB and sent.ledger.m_A == 1


# Hand-computed Z^{x1} X^{x0} (x) I applied to the EPR pair.
BELL_AFTER_ENCODING = {
    (0, 0): [S2, 0, 0, S2],
    (1, 0): [0, S2, S2, 0],
    (0, 1): [S2, 0, 0, -S2],
    (1, 1): [0, S2, -S2, 0],
}


@pytest.mark.parametrize("x", list(BELL_AFTER_ENCODING))
def test_superdense_encoding_round_gives_bell_states(x):
    p = superdense_protocol(1)
    s = trajectory(p, x)[1]
    assert np.allclose(s.vec, BELL_AFTER_ENCODING[x])


def test_run_protocol_examples():
    p = Protocol("p", 1, [0.5, 0.5])
    assert np.array_equal(run_protocol(p, "1").vec, initial_state(p).vec)
    for seed in range(5):
        q = random_protocol(seed, n=2, m_A=1, m_B=1, structured=False)
        assert np.linalg.norm(run_protocol(q, "11").vec) == pytest.approx(1, abs=1e-9)


def test_output_distribution_examples():
    ledger = Protocol("p", 0, [1.0], (Register("w", BOB, 2),)).initial_ledger()
    s = JointState(linalg.basis_state(0b10, 2), ledger)
    assert np.allclose(output_distribution(s, (0, 1)), [0, 0, 1, 0])
    s = JointState(np.full(4, 0.5, dtype=complex), ledger)
    assert np.allclose(output_distribution(s, (0, 1)), [0.25] * 4)


def test_success_probability_examples():
    assert success_probability(superdense_protocol(1)) == pytest.approx(1.0)
    for seed in range(5):
        p = random_protocol(seed, n=3, m_A=0, m_B=2, rounds=2)
        assert success_probability(p) <= 2 ** -3 + 1e-9
        q = random_protocol(seed, n=3, m_A=1, m_B=1, rounds=2)
        assert success_probability(q) <= 4 / 8 + 1e-9
