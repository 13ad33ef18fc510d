from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from eacomm import gates, ip
from eacomm.certificate import certify_protocol
from eacomm.coding import bound_rhs
from eacomm.model import BOB, Gate, Round, messages, success_probability


def test_ip_value_examples():
    assert all(ip.ip_value((0, 0, 0, 0), y) == 0 for y in messages(4))
    assert ip.ip_value((1, 1), (1, 1)) == 0
    assert ip.ip_value((1, 0, 1, 1), (1, 1, 0, 1)) == 0
    assert ip.ip_value((1, 0), (1, 1)) == 1
    with pytest.raises(ValueError):
        ip.ip_value((1,), (1, 0))


def test_classical_n4_t1_is_three_quarters_with_four_bits():
    r = ip.classical_ip_protocol(4, 1)
    assert r.bits == 4
    assert r.min_success == r.max_success == Fraction(3, 4)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_classical_t_equals_n(n):
    r = ip.classical_ip_protocol(n, n)
    assert r.bits == 1 and r.min_success == Fraction(1, 2) + Fraction(1, 2 ** (n + 1))


def test_classical_t0_is_exact():
    r = ip.classical_ip_protocol(3, 0)
    assert r.bits == 4 and r.min_success == 1


def test_epsilon_t_conversions():
    assert ip.epsilon_for_t(1) == 0.25
    assert ip.t_for_epsilon(0.25) == 1
    assert ip.t_for_epsilon(0.3) == 1
    assert ip.t_for_epsilon(0.375) == 2
    with pytest.raises(ValueError):
        ip.t_for_epsilon(0.5)


def test_lower_bound_examples():
    assert ip.ip_lower_bound(4, 0) == 2
    assert ip.ip_lower_bound(4, 0.25) == pytest.approx(1)


@pytest.mark.parametrize("n,t,qubits", [(2, 1, 1), (1, 1, 1), (4, 1, 2), (3, 1, 2)])
def test_quantum_protocol_qubits_and_success(n, t, qubits):
    r = ip.quantum_ip_protocol(n, t)
    assert r.quantum_qubits == qubits
    assert r.quantum_qubits == -(-r.classical_bits // 2)
    assert r.success_exact == pytest.approx(0.5 + 2.0 ** (-t - 1), abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sandwich(n):
    for t in range(1, n + 1):
        r = ip.quantum_ip_protocol(n, t)
        assert r.lower_bound_qubits <= r.quantum_qubits + 1e-12
        assert r.quantum_qubits <= r.upper_bound_formula + 0.5


def test_odd_message_is_padded():
    r = ip.quantum_ip_protocol(3, 3)
    assert r.classical_bits == 1 and r.padded and r.quantum_qubits == 1


def test_trivial_ip_protocol_is_exact_or_eps_noisy():
    exact = ip.trivial_ip_protocol(2)
    noisy = ip.trivial_ip_protocol(2, 0.1)
    for x in messages(2):
        for y in messages(2):
            assert ip.ip_input_success(exact, x, y) == pytest.approx(1)
            assert ip.ip_input_success(noisy, x, y) == pytest.approx(0.9)


def test_reduction_exact_case_recovers_perfectly():
    t, worst = ip.reduce_ip_to_transmission(ip.trivial_ip_protocol(2))
    assert worst == pytest.approx(1, abs=1e-9)
    assert success_probability(t) == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("eps", [0.05, 0.1])
def test_reduction_recovers_with_one_minus_two_eps_squared(eps):
    t, rep = ip.reduction_report(2, eps)
    assert rep.recovery_worst == pytest.approx((1 - 2 * eps) ** 2, abs=1e-9)
    # average over messages = (1-2e)^2 + (1 - (1-2e)^2) / 2^n
    a = (1 - 2 * eps) ** 2
    assert rep.recovery_average == pytest.approx(a + (1 - a) / 4, abs=1e-9)
    assert rep.ip_error == pytest.approx(eps, abs=1e-12)


def test_compiled_protocol_satisfies_certificate_and_bound():
    t, rep = ip.reduction_report(2, 0.1)
    for x in messages(2):
        c, res = certify_protocol(t, x)
        assert res <= 1e-8 and c.trace_residual() <= 1e-9
    assert rep.recovery_average <= bound_rhs(t.n, t.m_A) + 1e-9
    assert rep.m_A == rep.ip_m_A + rep.ip_m_B and rep.m_B == rep.ip_m_A + rep.ip_m_B


def test_dirty_protocol_is_refused():
    c = ip.trivial_ip_protocol(2)
    p = c.protocol
    extra = Round(BOB, (Gate(gates.X, (c.y[0],)),), ())
    dirty = ip.IpCircuit(replace(p, rounds=p.rounds + (extra,)), c.answer, c.y)
    with pytest.raises(ip.NotCleanError):
        ip.compile_transmission(dirty)


def test_bad_parameters():
    with pytest.raises(ValueError):
        ip.classical_ip_protocol(2, 3)
    with pytest.raises(ValueError):
        ip.trivial_ip_protocol(2, 0.5)
    assert np.isfinite(ip.ip_lower_bound(3, 0.4))
