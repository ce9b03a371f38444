import math

import numpy as np
import pytest

from constants import (
    InvalidParameterError,
)

from pulse import (
    ENVELOPE_DECAY_WIDTHS,
    PulseParams,
    ScaledPulse,
    polarization_x,
)

def scaled_pulse(amplitude=0.2, frequency=1.0, angle=math.pi / 4, width=12.0, eta=0.3):
    return ScaledPulse(amplitude, frequency, angle, width, 100.0, eta)

def vector_potential(pulse, x, t):
    phase = pulse.wave_number_x * x - pulse.frequency * t
    u = (pulse.wave_number_x / pulse.cycles) * x - (t - pulse.center) / pulse.width
    return pulse.amplitude * math.exp(-u * u) * math.cos(phase)

@pytest.mark.parametrize('angle', [0.0, 0.4, math.pi / 4, 1.2])
def test_polarization_is_transverse(angle):
    pulse = PulseParams(1.0, 1e16, angle, 1e-14, 0.0)

    assert float(np.dot(pulse.wave_vector, pulse.polarization)) == pytest.approx(0.0, abs=1e-6 * 1e16 / 3e8)
    assert float(np.linalg.norm(pulse.polarization)) == pytest.approx(1.0)

def test_grazing_polarization_is_exactly_zero():
    assert polarization_x(math.pi / 2) == 0.0

def test_negative_amplitude_rejected():
    with pytest.raises(InvalidParameterError):
        PulseParams(-1.0, 1e16, 0.0, 1e-14, 0.0)

def test_non_positive_width_rejected():
    with pytest.raises(InvalidParameterError):
        PulseParams(1.0, 1e16, 0.0, 0.0, 0.0)

def test_scaled_pulse_units():
    pulse = PulseParams(0.5, 2e16, 0.3, 1e-14, 5e-14).scaled(1e16, 0.25)

    assert pulse.frequency == pytest.approx(2.0)
    assert pulse.width == pytest.approx(100.0)
    assert pulse.center == pytest.approx(500.0)
    assert pulse.wave_number_x == pytest.approx(2.0 * 0.25 * math.sin(0.3))
    assert pulse.cycles == pytest.approx(200.0)
    assert pulse.switch_on == pytest.approx(0.0)
    assert pulse.switch_off == pytest.approx(1000.0)

def test_force_is_minus_time_derivative_of_potential():
    pulse = scaled_pulse()
    h = 1e-5

    for x in (-0.8, 0.0, 1.3):
        for t in (90.0, 100.0, 113.0):
            derivative = (vector_potential(pulse, x, t + h) - vector_potential(pulse, x, t - h)) / (2.0 * h)
            force = pulse.force(np.array([x]), t)[0]

            assert force == pytest.approx(-pulse.polarization_x * derivative, rel=1e-6, abs=1e-10)

def test_grazing_pulse_exerts_no_force():
    pulse = scaled_pulse(angle=math.pi / 2)
    assert np.all(pulse.force(np.array([0.0, 1.0]), 100.0) == 0.0)

def test_zero_amplitude_exerts_no_force():
    pulse = scaled_pulse(amplitude=0.0)
    assert np.all(pulse.force(np.array([0.5]), 100.0) == 0.0)

def test_uncalibrated_pulse_cannot_act():
    pulse = scaled_pulse(amplitude=None)

    with pytest.raises(InvalidParameterError):
        pulse.force(np.array([0.0]), 100.0)

def test_envelope_below_threshold_after_decay_widths():
    pulse = scaled_pulse()

    assert pulse.envelope(pulse.center) == 1.0
    assert pulse.envelope(pulse.center + ENVELOPE_DECAY_WIDTHS * pulse.width) == pytest.approx(1e-6)
