import math

import pytest
import scipy.constants

from constants import (
    ELECTRON_MASS,
    ELEMENTARY_CHARGE,
    HBAR,
    REDUCED_MASS,
    SPEED_OF_LIGHT,
    VACUUM_PERMITTIVITY,
    InvalidParameterError,
    constants_echo,
)

from oscillator import (
    OscillatorParams,
    ScaledUnits,
    max_time_step,
    nondimensionalize,
    radiation_damping_coefficient,
    relaxation_time,
)

from helpers import (
    make_config,
    make_problem,
)

def test_constants_match_codata():
    assert HBAR == scipy.constants.hbar
    assert SPEED_OF_LIGHT == scipy.constants.c
    assert VACUUM_PERMITTIVITY == pytest.approx(scipy.constants.epsilon_0, rel=1e-12)
    assert ELEMENTARY_CHARGE == scipy.constants.e

def test_constants_echo_has_round_trip_values():
    echo = constants_echo()

    assert float(echo['hbar_J_s']) == HBAR
    assert float(echo['c_m_s']) == SPEED_OF_LIGHT
    assert 'Philox' in echo['generator']

def test_damping_reduced_mass():
    assert radiation_damping_coefficient(REDUCED_MASS, 1.60e-19) == pytest.approx(6.25e-20, rel=1e-3)

def test_damping_electron():
    assert radiation_damping_coefficient(ELECTRON_MASS, ELEMENTARY_CHARGE) == pytest.approx(6.27e-24, rel=1e-2)

def test_damping_neutral():
    assert radiation_damping_coefficient(REDUCED_MASS, 0.0) == 0.0

def test_damping_scales_as_charge_squared_over_mass():
    base = radiation_damping_coefficient(REDUCED_MASS, 1.60e-19)

    assert radiation_damping_coefficient(REDUCED_MASS, 3.2e-19) == pytest.approx(4.0 * base, rel=1e-12)
    assert radiation_damping_coefficient(2.0 * REDUCED_MASS, 1.60e-19) == pytest.approx(base / 2.0, rel=1e-12)

def test_damping_rejects_non_positive_mass():
    with pytest.raises(InvalidParameterError):
        radiation_damping_coefficient(0.0, 1.60e-19)

def test_scaled_damping_default():
    oscillator = OscillatorParams(REDUCED_MASS, 1.60e-19, 1e16)
    assert oscillator.scaled_damping == pytest.approx(6.25e-4, rel=1e-3)

def test_strong_damping_rejected():
    with pytest.raises(InvalidParameterError):
        OscillatorParams(REDUCED_MASS, 1.60e-17, 1e16)

def test_non_positive_frequency_rejected():
    with pytest.raises(InvalidParameterError):
        OscillatorParams(REDUCED_MASS, 1.60e-19, 0.0)

def test_ground_energy_is_half():
    units = ScaledUnits.from_oscillator(OscillatorParams(REDUCED_MASS, 1.60e-19, 1e16))
    assert units.energy_to_scaled(0.5 * HBAR * 1e16) == pytest.approx(0.5, rel=1e-15)

def test_unit_round_trips():
    units = ScaledUnits.from_oscillator(OscillatorParams(REDUCED_MASS, 1.60e-19, 1e16))

    for value in (1e-17, 3.7e-15, 2.5e-9):
        assert units.time_to_si(units.time_to_scaled(value)) == pytest.approx(value, rel=1e-12)
        assert units.length_to_si(units.length_to_scaled(value)) == pytest.approx(value, rel=1e-12)
        assert units.energy_to_si(units.energy_to_scaled(value)) == pytest.approx(value, rel=1e-12)
        assert units.field_to_si(units.field_to_scaled(value)) == pytest.approx(value, rel=1e-12)

def test_length_unit_and_eta():
    units = ScaledUnits.from_oscillator(OscillatorParams(REDUCED_MASS, 1.60e-19, 1e16))
    length = math.sqrt(HBAR / (REDUCED_MASS * 1e16))

    assert units.length_unit == pytest.approx(length, rel=1e-14)
    assert units.eta == pytest.approx(1e16 * length / SPEED_OF_LIGHT, rel=1e-14)

def test_neutral_field_unit_is_infinite():
    units = ScaledUnits.from_oscillator(OscillatorParams(REDUCED_MASS, 0.0, 1e16))
    assert math.isinf(units.field_unit)

def test_max_time_step():
    assert max_time_step(1.0) == pytest.approx(2.0 * math.pi / 10.0)

def test_relaxation_time():
    assert relaxation_time(0.01) == pytest.approx(500.0)
    assert relaxation_time(0.0) == 0.0

def test_default_bandwidth_in_scaled_units():
    config = make_config(charge_C=1.60e-19, zpf_bandwidth_over_gamma_w0sq=220.0)
    problem = nondimensionalize(config)

    assert problem.zpf_bandwidth == pytest.approx(0.1375, rel=1e-3)

def test_window_is_absolute_after_pulse_centre():
    problem = make_problem()
    two_pi = 2.0 * math.pi

    assert problem.pulse.center == pytest.approx(12.0 * two_pi)
    assert problem.measurement_window[0] == pytest.approx(20.0 * two_pi)
    assert problem.measurement_window[1] == pytest.approx(30.0 * two_pi)
    assert problem.gamma == pytest.approx(0.01, rel=1e-3)

def test_problem_with_pulse_moves_window():
    problem = make_problem()
    moved = problem.with_pulse(problem.pulse.with_frequency(2.0))

    assert moved.measurement_window == problem.measurement_window
    assert moved.pulse.frequency == 2.0

def test_time_step_too_large():
    with pytest.raises(InvalidParameterError):
        make_config(dt_periods=0.2)

def test_qm_time_step_above_classical_step():
    with pytest.raises(InvalidParameterError):
        make_config(qm_dt_periods=0.05)

def test_window_before_envelope_decays():
    with pytest.raises(InvalidParameterError):
        make_config(measure_from_periods=5.0)

def test_empty_window():
    with pytest.raises(InvalidParameterError):
        make_config(measure_from_periods=10.0, measure_to_periods=10.0)

def test_total_time_before_window_end():
    with pytest.raises(InvalidParameterError):
        make_config(total_time_periods=20.0)

def test_small_ensemble():
    with pytest.raises(InvalidParameterError):
        make_config(ensemble_size=1)

def test_single_level_basis():
    with pytest.raises(InvalidParameterError):
        make_config(qm_levels=1)

def test_seed_out_of_range():
    with pytest.raises(InvalidParameterError):
        make_config(master_seed=2 ** 64)
