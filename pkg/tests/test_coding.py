import numpy as np
import pytest

from eacomm import gates, linalg
from eacomm.coding import (Ensemble, EncodingScheme, absorb_ancilla, bell_decoder, bob_qubits,
                           bound_report, bound_rhs, check_encoding_bound, decode_success,
                           epr_ensemble, general_ensemble, helstrom_decoder, helstrom_success,
                           pgm_decoder, protocol_ensembles, scheme_ensembles, scheme_protocol,
                           superdense_protocol, superdense_scheme)
from eacomm.generators import random_protocol, random_scheme
from eacomm.linalg import LinalgError
from eacomm.model import run_protocol

S2 = 1 / np.sqrt(2)


def _pure(*vs):
    return [Ensemble(np.ones(1), np.atleast_2d(np.asarray(v, dtype=complex))) for v in vs]


def test_epr_ensemble_of_identity_is_the_epr_pair():
    s = EncodingScheme(1, 1, 0, np.eye(2)[None])
    e = epr_ensemble(s, 0)
    assert np.allclose(e.weights, [1]) and np.allclose(e.states, [[S2, 0, 0, S2]])


def test_superdense_ensembles_are_orthogonal_bell_states():
    ens = scheme_ensembles(superdense_scheme(1))
    rows = np.vstack([e.states for e in ens])
    assert linalg.gram_deviation(rows) < 1e-12
    assert decode_success(ens, bell_decoder(1)) == pytest.approx(1.0)


def test_superdense_m2_codewords_are_orthonormal():
    rows = np.vstack([e.states for e in scheme_ensembles(superdense_scheme(2))])
    assert rows.shape == (16, 16) and linalg.gram_deviation(rows) < 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_random_epr_ensemble_is_orthonormal_with_equal_weights(seed):
    s = random_scheme(seed, E=3, m=1, n=2)
    e = epr_ensemble(s, 1)
    assert e.states.shape == (4, 16)
    assert linalg.gram_deviation(e.states) < 1e-12
    assert np.all(e.weights == 0.25)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("uniform", [True, False])
def test_ensemble_density_matches_executor(seed, uniform):
    s = random_scheme(seed, E=2, m=1, n=2, uniform=uniform)
    p = scheme_protocol(s)
    make = epr_ensemble if uniform else general_ensemble
    for x in range(4):
        rho = make(s, x).density()
        ref = linalg.partial_trace(run_protocol(p, [x >> 1, x & 1]).vec, bob_qubits(s))
        assert np.max(np.abs(rho - ref)) < 1e-9


def test_general_ensemble_reduces_to_epr_for_uniform_lambda():
    s = random_scheme(3, E=2, m=2, n=1)
    assert np.allclose(general_ensemble(s, 0).density(), epr_ensemble(s, 0).density())


def test_product_shared_state_carries_no_entanglement():
    # lambda = [1, 0]: Bob's half is |0> whatever Alice does; only the sent qubit matters.
    s = EncodingScheme(1, 1, 1, np.array([np.eye(2), gates.X]), [1.0, 0.0])
    rhos = [general_ensemble(s, x).density() for x in range(2)]
    assert np.allclose(rhos[0], np.diag([1, 0, 0, 0]))
    assert np.allclose(rhos[1], np.diag([0, 0, 1, 0]))


def test_epr_ensemble_rejects_non_uniform():
    s = random_scheme(0, E=1, m=1, n=1, uniform=False)
    with pytest.raises(LinalgError):
        epr_ensemble(s, 0)


def test_scheme_validation():
    with pytest.raises(LinalgError):
        EncodingScheme(1, 2, 1, np.array([np.eye(2)] * 2))
    with pytest.raises(LinalgError):
        EncodingScheme(1, 1, 1, np.array([np.eye(2), np.ones((2, 2))]))
    with pytest.raises(LinalgError):
        EncodingScheme(1, 1, 1, np.array([np.eye(2)] * 2), [0.5, 0.6])


def test_pgm_examples():
    assert decode_success(_pure([1, 0], [0, 1]), pgm_decoder(_pure([1, 0], [0, 1]))) == pytest.approx(1)
    same = _pure([1, 0], [1, 0])
    assert decode_success(same, pgm_decoder(same)) == pytest.approx(0.5)
    pair = _pure([1, 0], [S2, S2])
    assert decode_success(pair, pgm_decoder(pair)) == pytest.approx((1 + S2) / 2)


def test_pgm_is_a_povm_with_reject():
    ens = scheme_ensembles(random_scheme(1, E=1, m=0, n=2))
    d = pgm_decoder(ens)
    assert d.completeness_deviation() < 1e-9
    assert d.min_eigenvalue() > -1e-9
    assert d.reject is not None


def test_helstrom_examples():
    rho = np.diag([0.5, 0.5])
    assert helstrom_success(rho, rho) == pytest.approx(0.5)
    assert helstrom_success(np.diag([1, 0]), np.diag([0, 1])) == pytest.approx(1)
    plus = np.full((2, 2), 0.5)
    assert helstrom_success(np.diag([1.0, 0]), plus) == pytest.approx((1 + S2) / 2)
    d = helstrom_decoder(np.diag([1.0, 0]), plus)
    got = decode_success(_pure([1, 0], [S2, S2]), d)
    assert got == pytest.approx((1 + S2) / 2)


def test_pgm_never_beats_helstrom():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = linalg.random_state(2, rng), linalg.random_state(2, rng)
        ens = _pure(a, b)
        pgm = decode_success(ens, pgm_decoder(ens))
        opt = helstrom_success(np.outer(a, a.conj()), np.outer(b, b.conj()))
        assert pgm <= opt + 1e-12


def test_identity_encoders_give_chance():
    s = EncodingScheme(2, 1, 2, np.array([np.eye(4)] * 4))
    assert check_encoding_bound(s).success == pytest.approx(0.25)


def test_bound_rhs_examples():
    assert bound_rhs(2, 1) == 1
    assert bound_rhs(4, 1) == 0.25
    assert bound_rhs(3, 0) == 0.125
    assert bound_rhs(2, 5) == 1
    with pytest.raises(ValueError):
        bound_rhs(-1, 0)


def test_superdense_is_tight():
    r = check_encoding_bound(superdense_scheme(1), bell_decoder(1))
    assert abs(r.margin) < 1e-12 and r.tight and r.holds


@pytest.mark.parametrize("seed", range(15))
def test_random_scheme_obeys_bound(seed):
    r = check_encoding_bound(random_scheme(seed, E=2, m=1, n=3))
    assert r.success <= 0.5 + 1e-9
    r4 = check_encoding_bound(random_scheme(seed, E=2, m=1, n=4))
    assert r4.margin >= -1e-9


def test_m0_scheme_is_at_chance():
    r = check_encoding_bound(random_scheme(4, E=2, m=0, n=2))
    assert r.success <= 0.25 + 1e-9


def test_pgm_success_grows_with_m():
    # Sending more of the encoded qubits can only help the same decoder family.
    for seed in range(5):
        vals = []
        for m in range(3):
            s = random_scheme(seed, E=2, m=m, n=3)
            vals.append(check_encoding_bound(s).success)
        assert vals[0] <= vals[1] + 1e-9 <= vals[2] + 2e-9


def test_bound_report_margin_sign():
    r = bound_report(0.3, 2, 0)
    assert r.rhs == 0.25 and r.margin == pytest.approx(-0.05) and not r.holds


def test_absorb_ancilla_pads_with_zero_pairs():
    assert np.allclose(absorb_ancilla([0.5, 0.5], 1), [0.5, 0, 0.5, 0])


def test_superdense_protocol_matches_scheme():
    p = superdense_protocol(2)
    assert p.m_A == 2 and p.n == 4


@pytest.mark.parametrize("seed", range(6))
def test_protocol_ensembles_obey_bound_under_pgm(seed):
    p = random_protocol(seed, n=2, m_A=1, m_B=1, max_qubits=6)
    ens = protocol_ensembles(p)
    got = decode_success(ens, pgm_decoder(ens))
    assert got <= bound_rhs(p.n, p.m_A) + 1e-9
    assert all(abs(e.total_weight() - 1) < 1e-9 for e in ens)
