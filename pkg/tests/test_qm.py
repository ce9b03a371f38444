import math

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from constants import (
    HBAR,
    REDUCED_MASS,
    InvalidParameterError,
)

from pulse import (
    ScaledPulse,
)

from qm import (
    NormDriftError,
    OscillatorOperators,
    PulseCoupling,
    QmState,
    energy_expectation,
    hprime_matrix,
    multipole_factors,
    position_matrix,
    propagate,
    propagate_coupling,
    pulse_excitation,
    scaled_momentum_matrix,
    scaled_position_matrix,
    taylor_exp_matrix,
)

ETA = 0.359
QM_DT = 2.0 * math.pi * 0.00625

def pulse(amplitude=0.07, frequency=1.0, angle=math.pi / 4, width=10.0 * math.pi, center=0.0):
    return ScaledPulse(amplitude, frequency, angle, width, center, ETA)

def test_two_level_position():
    expected = np.array([[0.0, 1.0], [1.0, 0.0]]) / math.sqrt(2.0)
    assert np.allclose(scaled_position_matrix(2), expected)

def test_si_position_scale():
    matrix = position_matrix(2, REDUCED_MASS, 1e16)
    assert matrix[0, 1].real == pytest.approx(math.sqrt(HBAR / (2.0 * REDUCED_MASS * 1e16)))

def test_truncated_commutator():
    levels = 6
    x = scaled_position_matrix(levels)
    p = scaled_momentum_matrix(levels)
    commutator = x @ p - p @ x

    expected = 1j * np.diag([1.0] * (levels - 1) + [1.0 - levels])
    assert np.allclose(commutator, expected)

def test_position_squared_in_ground_state():
    x = scaled_position_matrix(10)
    assert (x @ x)[0, 0].real == pytest.approx(0.5)

def test_single_level_rejected():
    with pytest.raises(InvalidParameterError):
        scaled_position_matrix(1)

def test_taylor_order_zero_is_identity():
    matrix = np.arange(9, dtype=complex).reshape(3, 3)
    assert np.array_equal(taylor_exp_matrix(matrix, 0), np.eye(3))

@pytest.mark.parametrize('s', np.linspace(-2.0, 2.0, 9))
def test_taylor_scalar_exponential(s):
    value = taylor_exp_matrix(np.array([[1j * s]]), 20)[0, 0]
    assert abs(value - np.exp(1j * s)) < 1e-12

def test_taylor_matches_expm():
    rng = np.random.default_rng(3)
    matrix = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    matrix = 0.2 * (matrix + matrix.conj().T)

    assert np.allclose(taylor_exp_matrix(1j * matrix, 20), scipy.linalg.expm(1j * matrix), atol=1e-12)

def test_normal_incidence_factors_are_identity():
    operators = OscillatorOperators.build(8)
    f1, f2, f3 = multipole_factors(0.0 * operators.position, 100.0, 3.0, 20)

    for factor in (f1, f2, f3):
        assert np.allclose(factor, np.eye(8))

def test_factors_commute():
    operators = OscillatorOperators.build(20)
    kx = ETA * math.sin(math.pi / 4) * operators.position
    f1, f2, f3 = multipole_factors(kx, 125.0, -2.0, 20)

    assert np.allclose(f1 @ f3, f3 @ f1, atol=1e-10)
    assert np.allclose(f1 @ f2, f2 @ f1, atol=1e-10)

def test_negative_order_rejected():
    with pytest.raises(InvalidParameterError):
        multipole_factors(np.zeros((2, 2)), 1.0, 0.0, -1)

def test_hprime_is_hermitian():
    coupling = PulseCoupling(pulse(), OscillatorOperators.build(20), 20)

    for t in (-20.0, 0.0, 7.3):
        matrix = hprime_matrix(coupling, t)
        assert np.max(np.abs(matrix - matrix.conj().T)) < 1e-12

def test_hprime_vanishes_without_amplitude():
    coupling = PulseCoupling(pulse(amplitude=0.0), OscillatorOperators.build(5), 20)
    assert np.all(coupling(0.0) == 0.0)

def test_hprime_negligible_at_pulse_edges():
    shaped = pulse()
    coupling = PulseCoupling(shaped, OscillatorOperators.build(20), 20)

    for t in (shaped.switch_on, shaped.switch_off):
        assert np.max(np.abs(coupling(t))) < 1e-10

def test_energy_expectation_examples():
    assert energy_expectation(QmState.ground(5)) == 0.5
    assert energy_expectation(QmState(np.array([0.0, 1.0, 0.0], dtype=complex), 0.0)) == 1.5

    superposition = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
    assert energy_expectation(QmState(superposition, 0.0)) == pytest.approx(1.0)

def test_no_coupling_keeps_state():
    initial = QmState(np.array([0.6, 0.8j, 0.0]), 0.0)
    final = propagate_coupling(initial, lambda t: np.zeros((3, 3), dtype=complex), (0.0, 10.0), 0.1)

    assert np.array_equal(final.coefficients, initial.coefficients)
    assert final.t == 10.0

def test_resonant_rabi_oscillation():
    rabi = 0.1

    def hamiltonian(t):
        h = np.zeros((2, 2), dtype=complex)
        h[1, 0] = 0.5 * rabi * np.exp(-1j * t)
        h[0, 1] = 0.5 * rabi * np.exp(1j * t)
        return h

    half = propagate_coupling(QmState.ground(2), hamiltonian, (0.0, 0.5 * math.pi / rabi), 0.05)
    full = propagate_coupling(QmState.ground(2), hamiltonian, (0.0, math.pi / rabi), 0.05)

    assert half.probabilities[1] == pytest.approx(0.5, abs=1e-6)
    assert full.probabilities[1] == pytest.approx(1.0, abs=1e-6)

def test_norm_drift_detected():
    def hamiltonian(t):
        return 50.0 * np.eye(2, dtype=complex)

    with pytest.raises(NormDriftError) as error:
        propagate_coupling(QmState.ground(2), hamiltonian, (0.0, 5.0), 1.0)

    assert error.value.dt == pytest.approx(1.0)

    unchecked = propagate_coupling(QmState.ground(2), hamiltonian, (0.0, 5.0), 1.0, check_norm=False)
    assert unchecked.norm > 1.0

def test_first_order_excitation_matches_perturbation_theory():
    weak = pulse(amplitude=1e-3, angle=0.0, width=4.0 * math.pi)

    def potential(t):
        return weak.amplitude * math.exp(-((t - weak.center) / weak.width) ** 2) * math.cos(weak.frequency * t)

    span = (weak.switch_on, weak.switch_off)
    real, _ = scipy.integrate.quad(lambda t: potential(t) * math.cos(t), *span, limit=400)
    imag, _ = scipy.integrate.quad(lambda t: potential(t) * math.sin(t), *span, limit=400)

    state = pulse_excitation(weak, 4, 20, QM_DT)

    assert state.probabilities[1] == pytest.approx(0.5 * (real * real + imag * imag), rel=1e-3)
    assert energy_expectation(state) - 0.5 == pytest.approx(state.probabilities[1], rel=1e-2)

def test_propagate_checks_basis_size():
    with pytest.raises(InvalidParameterError):
        propagate(QmState.ground(3), pulse(), OscillatorOperators.build(4), QM_DT, (0.0, 1.0))

@pytest.mark.slow
def test_grazing_incidence_barely_excites():
    state = pulse_excitation(pulse(angle=math.pi / 2), 10, 20, QM_DT)
    assert energy_expectation(state) - 0.5 < 1e-3

@pytest.mark.slow
def test_basis_and_expansion_converged():
    reference = energy_expectation(pulse_excitation(pulse(), 20, 20, QM_DT))
    larger_basis = energy_expectation(pulse_excitation(pulse(), 30, 20, QM_DT))
    higher_order = energy_expectation(pulse_excitation(pulse(), 20, 30, QM_DT))

    assert reference > 0.5
    assert larger_basis == pytest.approx(reference, rel=0.01)
    assert higher_order == pytest.approx(reference, rel=0.01)
