import logging
import math

from dataclasses import (
    dataclass,
    field,
    replace,
)

from typing import (
    Tuple,
)

from constants import (
    HBAR,
    SPEED_OF_LIGHT,
    VACUUM_PERMITTIVITY,
    InvalidParameterError,
)

from pulse import (
    ENVELOPE_DECAY_WIDTHS,
    PulseParams,
    ScaledPulse,
)

from zpf import (
    ZpfParams,
)

logger = logging.getLogger(__name__)

# Upper bound on gamma = Gamma * omega0 for the weak-damping model
MAX_SCALED_DAMPING = 0.1

# Relaxation before the pulse, in units of the energy decay time 1/gamma
RELAXATION_DECAY_TIMES = 5.0

# Minimum number of integration steps per period of the fastest frequency
STEPS_PER_PERIOD = 10

def radiation_damping_coefficient(mass: float, charge: float) -> float:
    """
    Radiation damping time Gamma = 2 q^2 / (3 m c^3) / (4 pi epsilon0)

    :param float mass: particle mass in kg
    :param float charge: particle charge in C
    :return: Gamma in s
    :raises InvalidParameterError: non-positive mass
    """
    if mass <= 0:
        raise InvalidParameterError(f"mass must be positive, got {mass!r}")

    return (
        2.0 * charge * charge / (3.0 * mass * SPEED_OF_LIGHT ** 3)
        / (4.0 * math.pi * VACUUM_PERMITTIVITY)
    )

def max_time_step(max_frequency: float) -> float:
    """Largest scaled step that keeps STEPS_PER_PERIOD steps per fastest period."""
    return 2.0 * math.pi / (STEPS_PER_PERIOD * max_frequency)

@dataclass(frozen=True)
class OscillatorParams:
    """
    Charged harmonic oscillator

    ...

    Attributes
    ----------
    mass: float
        kg
    charge: float
        C
    natural_frequency: float
        omega0 in rad/s
    damping: float
        Gamma in s, derived from mass and charge

    """

    mass: float
    charge: float
    natural_frequency: float
    damping: float = field(init=False)

    def __post_init__(self) -> None:

        if self.natural_frequency <= 0:
            raise InvalidParameterError(
                f"natural frequency must be positive, got {self.natural_frequency!r}"
            )

        damping = radiation_damping_coefficient(self.mass, self.charge)
        object.__setattr__(self, 'damping', damping)

        if damping * self.natural_frequency >= MAX_SCALED_DAMPING:
            raise InvalidParameterError(
                f"Gamma * omega0 = {damping * self.natural_frequency!r} is outside the weak-damping regime"
            )

    @property
    def scaled_damping(self) -> float:
        return self.damping * self.natural_frequency

@dataclass(frozen=True)
class ScaledUnits:
    """
    Oscillator units: time 1/omega0, length sqrt(hbar/(m omega0)), energy hbar omega0

    The field unit hbar/(|q| l) makes the dimensionless vector potential
    a = q A l / hbar the coupling that enters both the classical force and H'.

    ...

    Attributes
    ----------
    time_unit: float
    length_unit: float
    energy_unit: float
    field_unit: float
        V s / m per unit amplitude, infinite for a neutral particle
    omega0: float

    """

    time_unit: float
    length_unit: float
    energy_unit: float
    field_unit: float
    omega0: float

    @classmethod
    def from_oscillator(cls, oscillator: OscillatorParams) -> "ScaledUnits":
        omega0 = oscillator.natural_frequency
        length_unit = math.sqrt(HBAR / (oscillator.mass * omega0))
        charge = abs(oscillator.charge)

        return cls(
            time_unit=1.0 / omega0,
            length_unit=length_unit,
            energy_unit=HBAR * omega0,
            field_unit=HBAR / (charge * length_unit) if charge > 0 else math.inf,
            omega0=omega0,
        )

    @property
    def eta(self) -> float:
        """omega0 * l / c, the vacuum wave number at omega0 in inverse oscillator lengths."""
        return self.omega0 * self.length_unit / SPEED_OF_LIGHT

    def time_to_scaled(self, t: float) -> float:
        return t / self.time_unit

    def time_to_si(self, t: float) -> float:
        return t * self.time_unit

    def length_to_scaled(self, x: float) -> float:
        return x / self.length_unit

    def length_to_si(self, x: float) -> float:
        return x * self.length_unit

    def energy_to_scaled(self, energy: float) -> float:
        return energy / self.energy_unit

    def energy_to_si(self, energy: float) -> float:
        return energy * self.energy_unit

    def field_to_scaled(self, vector_potential: float) -> float:
        return vector_potential / self.field_unit

    def field_to_si(self, amplitude: float) -> float:
        return amplitude * self.field_unit

    def periods_to_scaled(self, periods: float) -> float:
        return 2.0 * math.pi * periods

@dataclass(frozen=True)
class SimulationConfig:
    """
    Complete, validated description of one run

    Times are scaled (1/omega0). The measurement window is an offset
    interval after the pulse centre.

    ...

    Attributes
    ----------
    oscillator: OscillatorParams
    pulse: PulseParams
    zpf: ZpfParams
    ensemble_size: int
    time_step: float
    total_time: float
    measurement_window: Tuple[float, float]
    master_seed: int
    qm_levels: int
    expansion_order: int
    qm_time_step: float
    zpf_at_origin: bool

    """

    oscillator: OscillatorParams
    pulse: PulseParams
    zpf: ZpfParams
    ensemble_size: int
    time_step: float
    total_time: float
    measurement_window: Tuple[float, float]
    master_seed: int
    qm_levels: int
    expansion_order: int
    qm_time_step: float
    zpf_at_origin: bool = False

    def __post_init__(self) -> None:
        omega0 = self.oscillator.natural_frequency
        max_frequency = max(self.zpf.omega_max, self.pulse.carrier_frequency) / omega0

        if not 0 < self.time_step < max_time_step(max_frequency):
            raise InvalidParameterError(
                f"time step {self.time_step!r} must be below {max_time_step(max_frequency)!r} "
                f"to resolve frequency {max_frequency!r} omega0"
            )

        if not 0 < self.qm_time_step <= self.time_step:
            raise InvalidParameterError(
                f"quantum time step {self.qm_time_step!r} must lie in (0, {self.time_step!r}]"
            )

        start, end = self.measurement_window
        width = self.pulse.width * omega0

        if start < ENVELOPE_DECAY_WIDTHS * width:
            raise InvalidParameterError(
                f"measurement window starts {start!r} after the pulse centre, "
                f"before the envelope decays below 1e-6 at {ENVELOPE_DECAY_WIDTHS * width!r}"
            )

        if end <= start:
            raise InvalidParameterError(
                f"measurement window ({start!r}, {end!r}) is empty"
            )

        if self.total_time < self.pulse.center * omega0 + end:
            raise InvalidParameterError(
                f"total time {self.total_time!r} ends before the measurement window"
            )

        if self.ensemble_size < 2:
            raise InvalidParameterError(
                f"ensemble size must be at least 2, got {self.ensemble_size}"
            )

        if self.qm_levels < 2:
            raise InvalidParameterError(
                f"at least 2 quantum levels are needed, got {self.qm_levels}"
            )

        if self.expansion_order < 0:
            raise InvalidParameterError(
                f"expansion order must be non-negative, got {self.expansion_order}"
            )

        if not 0 <= self.master_seed < 2 ** 64:
            raise InvalidParameterError(
                f"master seed must be an unsigned 64-bit integer, got {self.master_seed}"
            )

    def with_pulse(self, pulse: PulseParams) -> "SimulationConfig":
        return replace(self, pulse=pulse)

    def with_seed(self, master_seed: int) -> "SimulationConfig":
        return replace(self, master_seed=master_seed)

@dataclass(frozen=True)
class ScaledProblem:
    """
    Dimensionless form of a SimulationConfig

    ...

    Attributes
    ----------
    units: ScaledUnits
    gamma: float
        Gamma * omega0, the only damping parameter
    pulse: ScaledPulse
    zpf: ZpfParams
        kept in SI since the mode sampling works in k-space
    coupling: float
        q / (m omega0^2 l), converts an electric field in V/m into scaled force
    time_step: float
    qm_time_step: float
    total_time: float
    measurement_window: Tuple[float, float]
        absolute scaled times
    relaxation_time: float
    ensemble_size: int
    master_seed: int
    qm_levels: int
    expansion_order: int
    zpf_at_origin: bool

    """

    units: ScaledUnits
    gamma: float
    pulse: ScaledPulse
    zpf: ZpfParams
    coupling: float
    time_step: float
    qm_time_step: float
    total_time: float
    measurement_window: Tuple[float, float]
    relaxation_time: float
    ensemble_size: int
    master_seed: int
    qm_levels: int
    expansion_order: int
    zpf_at_origin: bool

    @property
    def zpf_bandwidth(self) -> float:
        return self.zpf.bandwidth / self.units.omega0

    def with_pulse(self, pulse: ScaledPulse) -> "ScaledProblem":
        """Moves the measurement window along with the pulse centre."""
        shift = pulse.center - self.pulse.center
        start, end = self.measurement_window

        return replace(
            self,
            pulse=pulse,
            measurement_window=(start + shift, end + shift),
            total_time=self.total_time + max(shift, 0.0),
        )

    def with_ensemble(self, ensemble_size: int, master_seed: int) -> "ScaledProblem":
        return replace(self, ensemble_size=ensemble_size, master_seed=master_seed)

def relaxation_time(gamma: float) -> float:
    """Time for the ZPF to bring a trajectory started at rest to equilibrium."""
    if gamma <= 0:
        return 0.0

    return RELAXATION_DECAY_TIMES / gamma

def nondimensionalize(config: SimulationConfig) -> ScaledProblem:
    """
    Converts a validated config into oscillator units

    :param SimulationConfig config: the run configuration
    :return: the scaled problem
    """
    oscillator = config.oscillator
    units = ScaledUnits.from_oscillator(oscillator)
    omega0 = oscillator.natural_frequency

    pulse = config.pulse.scaled(omega0, units.eta)
    center = pulse.center
    start, end = config.measurement_window

    coupling = oscillator.charge / (oscillator.mass * omega0 ** 2 * units.length_unit)

    problem = ScaledProblem(
        units=units,
        gamma=oscillator.scaled_damping,
        pulse=pulse,
        zpf=config.zpf,
        coupling=coupling,
        time_step=config.time_step,
        qm_time_step=config.qm_time_step,
        total_time=config.total_time,
        measurement_window=(center + start, center + end),
        relaxation_time=relaxation_time(oscillator.scaled_damping),
        ensemble_size=config.ensemble_size,
        master_seed=config.master_seed,
        qm_levels=config.qm_levels,
        expansion_order=config.expansion_order,
        zpf_at_origin=config.zpf_at_origin,
    )

    logger.debug(
        "Scaled problem: gamma = %r, eta = %r, pulse centre = %r, window = %r",
        problem.gamma,
        units.eta,
        center,
        problem.measurement_window
    )

    return problem
