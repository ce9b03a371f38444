import math

from dataclasses import (
    dataclass,
    replace,
)

from typing import (
    Optional,
)

import numpy as np

from constants import (
    SPEED_OF_LIGHT,
    InvalidParameterError,
)

# Envelope widths on either side of the pulse centre during which the pulse acts
PULSE_HALF_SPAN = 5.0

# Envelope widths after the centre at which exp(-u^2) falls below 1e-6
ENVELOPE_DECAY_WIDTHS = math.sqrt(math.log(1e6))

def polarization_x(theta: float) -> float:
    """
    x-component of the pulse polarization, cos(theta).

    Evaluated as sin(pi/2 - theta) so that theta = pi/2 gives exactly zero.
    """
    return math.sin(0.5 * math.pi - theta)

@dataclass(frozen=True)
class PulseParams:
    """
    Gaussian excitation pulse in SI units

    ...

    Attributes
    ----------
    amplitude: Optional[float]
        peak vector potential in field units hbar/(q l); None means calibrate
    carrier_frequency: float
        omega_p in rad/s
    angle: float
        incidence angle theta_p in rad
    width: float
        temporal width Delta t in s
    center: float
        arrival time t0 of the envelope peak in s

    """

    amplitude: Optional[float]
    carrier_frequency: float
    angle: float
    width: float
    center: float

    def __post_init__(self) -> None:

        if self.carrier_frequency <= 0:
            raise InvalidParameterError(
                f"pulse carrier frequency must be positive, got {self.carrier_frequency!r}"
            )

        if self.width <= 0:
            raise InvalidParameterError(
                f"pulse width must be positive, got {self.width!r}"
            )

        if self.amplitude is not None and self.amplitude < 0:
            raise InvalidParameterError(
                f"pulse amplitude must be non-negative, got {self.amplitude!r}"
            )

    @property
    def wave_vector(self) -> np.ndarray:
        k = self.carrier_frequency / SPEED_OF_LIGHT
        return np.array([
            k * math.sin(self.angle),
            0.0,
            k * polarization_x(self.angle),
        ])

    @property
    def polarization(self) -> np.ndarray:
        return np.array([
            polarization_x(self.angle),
            0.0,
            -math.sin(self.angle),
        ])

    @property
    def spatial_width(self) -> float:
        return SPEED_OF_LIGHT * self.width

    def with_carrier(self, carrier_frequency: float) -> "PulseParams":
        return replace(self, carrier_frequency=carrier_frequency)

    def with_angle(self, angle: float) -> "PulseParams":
        return replace(self, angle=angle)

    def with_amplitude(self, amplitude: Optional[float]) -> "PulseParams":
        return replace(self, amplitude=amplitude)

    def scaled(self, omega0: float, eta: float) -> "ScaledPulse":
        """
        Converts the pulse into oscillator units

        :param float omega0: natural frequency in rad/s
        :param float eta: omega0 * length_unit / c
        :return: the dimensionless pulse
        """
        return ScaledPulse(
            amplitude=self.amplitude,
            frequency=self.carrier_frequency / omega0,
            angle=self.angle,
            width=self.width * omega0,
            center=self.center * omega0,
            eta=eta,
        )

@dataclass(frozen=True)
class ScaledPulse:
    """
    Gaussian excitation pulse in oscillator units

    Times are in 1/omega0, positions in the oscillator length and the
    amplitude is the dimensionless vector potential a = q A l / hbar.

    ...

    Attributes
    ----------
    amplitude: Optional[float]
    frequency: float
        omega_p / omega0
    angle: float
    width: float
        omega0 * Delta t
    center: float
        omega0 * t0
    eta: float
        omega0 * l / c, the wave number at omega0 in inverse oscillator lengths

    """

    amplitude: Optional[float]
    frequency: float
    angle: float
    width: float
    center: float
    eta: float

    @property
    def polarization_x(self) -> float:
        return polarization_x(self.angle)

    @property
    def polarization_z(self) -> float:
        return -math.sin(self.angle)

    @property
    def wave_number_x(self) -> float:
        """x-component of k_p in inverse oscillator lengths."""
        return self.frequency * self.eta * math.sin(self.angle)

    @property
    def cycles(self) -> float:
        """|k_p| * Delta x = omega_p * Delta t."""
        return self.frequency * self.width

    @property
    def switch_on(self) -> float:
        return self.center - PULSE_HALF_SPAN * self.width

    @property
    def switch_off(self) -> float:
        return self.center + PULSE_HALF_SPAN * self.width

    def require_amplitude(self) -> float:

        if self.amplitude is None:
            raise InvalidParameterError(
                "pulse amplitude is 'auto' and has not been calibrated"
            )

        return self.amplitude

    def with_frequency(self, frequency: float) -> "ScaledPulse":
        return replace(self, frequency=frequency)

    def with_angle(self, angle: float) -> "ScaledPulse":
        return replace(self, angle=angle)

    def with_amplitude(self, amplitude: Optional[float]) -> "ScaledPulse":
        return replace(self, amplitude=amplitude)

    def envelope(self, t: float) -> float:
        tau = (t - self.center) / self.width
        return math.exp(-tau * tau)

    def force(self, x: np.ndarray, t: float) -> np.ndarray:
        """
        Classical force of the pulse on the oscillator, -eps_x * da/dt

        :param np.ndarray x: oscillator positions
        :param float t: time
        :return: force in units of m * omega0^2 * l
        """
        amplitude = self.require_amplitude()
        eps_x = self.polarization_x

        if amplitude == 0.0 or eps_x == 0.0:
            return np.zeros_like(x)

        kx = self.wave_number_x
        phase = kx * x - self.frequency * t
        u = (kx / self.cycles) * x - (t - self.center) / self.width
        gauss = np.exp(-u * u)

        return -amplitude * eps_x * gauss * (
            self.frequency * np.sin(phase) + (2.0 * u / self.width) * np.cos(phase)
        )
