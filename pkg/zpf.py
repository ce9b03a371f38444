import logging
import math

from dataclasses import (
    dataclass,
)

from typing import (
    List,
    Tuple,
    Union,
)

import numpy as np

from constants import (
    HBAR,
    SPEED_OF_LIGHT,
    VACUUM_PERMITTIVITY,
    InvalidParameterError,
)

logger = logging.getLogger(__name__)

# Uniform draws per mode, in this order
DRAW_ORDER: Tuple[str, ...] = ('cos_theta', 'phi', 'chi', 'phase_1', 'phase_2')

ArrayOrFloat = Union[float, np.ndarray]

def trajectory_generator(master_seed: int, trajectory: int) -> np.random.Generator:
    """
    Counter-based generator for one trajectory of an ensemble

    The substream is fully determined by (master_seed, trajectory), so any
    trajectory can be reproduced without replaying the others.

    :param int master_seed: the run's 64-bit seed
    :param int trajectory: index of the trajectory in the ensemble
    :return: a Philox-backed numpy generator
    """
    seed_sequence = np.random.SeedSequence(master_seed, spawn_key=(trajectory,))
    return np.random.Generator(np.random.Philox(seed_sequence))

@dataclass(frozen=True)
class ZpfParams:
    """
    Spectral window of the sampled zero-point field

    ...

    Attributes
    ----------
    n_modes: int
    bandwidth: float
        Delta in rad/s
    center: float
        omega0 in rad/s

    """

    n_modes: int
    bandwidth: float
    center: float

    def __post_init__(self) -> None:

        if self.n_modes < 2:
            raise InvalidParameterError(
                f"at least 2 ZPF modes are needed, got {self.n_modes}"
            )

        if self.bandwidth <= 0:
            raise InvalidParameterError(
                f"ZPF bandwidth must be positive, got {self.bandwidth!r}"
            )

        if self.center - self.bandwidth / 2 <= 0:
            raise InvalidParameterError(
                "ZPF bandwidth extends below zero frequency"
            )

    @property
    def omega_min(self) -> float:
        return self.center - self.bandwidth / 2

    @property
    def omega_max(self) -> float:
        return self.center + self.bandwidth / 2

    @property
    def shell_volume(self) -> float:
        """k-space volume of the spherical shell holding the modes, in m^-3."""
        k_max = self.omega_max / SPEED_OF_LIGHT
        k_min = self.omega_min / SPEED_OF_LIGHT
        return 4.0 * math.pi / 3.0 * k_max ** 3 - 4.0 * math.pi / 3.0 * k_min ** 3

    @property
    def volume(self) -> float:
        """Quantization volume V in m^3."""
        return (2.0 * math.pi) ** 3 * self.n_modes / self.shell_volume

@dataclass(frozen=True)
class ZpfMode:
    """
    One sampled vacuum mode with its two polarizations

    ...

    Attributes
    ----------
    wave_vector: np.ndarray
    angular_frequency: float
    polarization_1: np.ndarray
    polarization_2: np.ndarray
    phase_1: float
    phase_2: float

    """

    wave_vector: np.ndarray
    angular_frequency: float
    polarization_1: np.ndarray
    polarization_2: np.ndarray
    phase_1: float
    phase_2: float

@dataclass(frozen=True)
class ZpfRealization:
    """
    One member of the stochastic ZPF ensemble, stored column-wise

    ...

    Attributes
    ----------
    wave_vectors: np.ndarray
        (n_modes, 3) in rad/m
    angular_frequencies: np.ndarray
        (n_modes,) in rad/s
    polarizations_1: np.ndarray
        (n_modes, 3)
    polarizations_2: np.ndarray
        (n_modes, 3)
    phases: np.ndarray
        (n_modes, 2), one random phase per polarization
    volume: float
        quantization volume in m^3
    amplitude_factors: np.ndarray
        sqrt(hbar / (epsilon0 V omega)) per mode

    """

    wave_vectors: np.ndarray
    angular_frequencies: np.ndarray
    polarizations_1: np.ndarray
    polarizations_2: np.ndarray
    phases: np.ndarray
    volume: float
    amplitude_factors: np.ndarray

    @property
    def n_modes(self) -> int:
        return int(self.angular_frequencies.shape[0])

    @property
    def field_amplitudes(self) -> np.ndarray:
        """sqrt(hbar omega / (epsilon0 V)), the electric field amplitude per mode."""
        return self.amplitude_factors * self.angular_frequencies

    @property
    def modes(self) -> List[ZpfMode]:
        return [
            ZpfMode(
                wave_vector=self.wave_vectors[i],
                angular_frequency=float(self.angular_frequencies[i]),
                polarization_1=self.polarizations_1[i],
                polarization_2=self.polarizations_2[i],
                phase_1=float(self.phases[i, 0]),
                phase_2=float(self.phases[i, 1]),
            )
            for i in range(self.n_modes)
        ]

def polarization_basis(
    theta: ArrayOrFloat,
    phi: ArrayOrFloat,
    chi: ArrayOrFloat
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Transverse polarization pair for a wave vector along (theta, phi),
    rotated by chi about the wave vector

    :param theta: polar angle of k
    :param phi: azimuthal angle of k
    :param chi: rotation of the pair in the transverse plane
    :return: (epsilon_1, epsilon_2) with the vector index last
    """
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    cos_p, sin_p = np.cos(phi), np.sin(phi)
    cos_c, sin_c = np.cos(chi), np.sin(chi)

    epsilon_1 = np.stack([
        cos_t * cos_p * cos_c - sin_p * sin_c,
        cos_t * sin_p * cos_c + cos_p * sin_c,
        -sin_t * cos_c,
    ], axis=-1)

    epsilon_2 = np.stack([
        -cos_t * cos_p * sin_c - sin_p * cos_c,
        -cos_t * sin_p * sin_c + cos_p * cos_c,
        sin_t * sin_c,
    ], axis=-1)

    return epsilon_1, epsilon_2

def sample_modes(
    params: ZpfParams,
    rng: np.random.Generator
) -> ZpfRealization:
    """
    Samples the vacuum modes in spherical coordinates

    Radii are placed on a uniform grid in kappa = k^3 / 3 so that the modes
    fill the shell uniformly; directions, polarization angle and phases are
    drawn per mode in DRAW_ORDER.

    :param ZpfParams params: the spectral window
    :param np.random.Generator rng: the trajectory's stream
    :return: the sampled realization
    """
    n_modes = params.n_modes

    k_min = params.omega_min / SPEED_OF_LIGHT
    k_max = params.omega_max / SPEED_OF_LIGHT

    kappa_min = k_min ** 3 / 3.0
    kappa_step = (k_max ** 3 / 3.0 - kappa_min) / (n_modes - 1)
    kappa = kappa_min + np.arange(n_modes) * kappa_step
    k = np.cbrt(3.0 * kappa)

    draws = rng.random((n_modes, len(DRAW_ORDER)))
    cos_theta = 2.0 * draws[:, 0] - 1.0
    phi = 2.0 * math.pi * draws[:, 1]
    chi = 2.0 * math.pi * draws[:, 2]
    phases = 2.0 * math.pi * draws[:, 3:5]

    theta = np.arccos(cos_theta)
    sin_theta = np.sin(theta)

    wave_vectors = np.stack([
        k * sin_theta * np.cos(phi),
        k * sin_theta * np.sin(phi),
        k * cos_theta,
    ], axis=-1)

    epsilon_1, epsilon_2 = polarization_basis(theta, phi, chi)

    angular_frequencies = SPEED_OF_LIGHT * k
    volume = params.volume
    amplitude_factors = np.sqrt(
        HBAR / (VACUUM_PERMITTIVITY * volume * angular_frequencies)
    )

    logger.debug(
        "Sampled %d ZPF modes, V = %r m^3",
        n_modes,
        volume
    )

    return ZpfRealization(
        wave_vectors=wave_vectors,
        angular_frequencies=angular_frequencies,
        polarizations_1=epsilon_1,
        polarizations_2=epsilon_2,
        phases=phases,
        volume=volume,
        amplitude_factors=amplitude_factors,
    )

def zpf_electric_field_x(
    realization: ZpfRealization,
    x: np.ndarray,
    t: float
) -> float:
    """
    x-component of E = -dA/dt of the sampled field

    :param ZpfRealization realization: the sampled modes
    :param np.ndarray x: position 3-vector in m
    :param float t: time in s
    :return: the field in V/m
    """
    spatial = realization.wave_vectors @ np.asarray(x, dtype=float)
    phase = spatial - realization.angular_frequencies * t

    polarized = (
        np.sin(phase + realization.phases[:, 0]) * realization.polarizations_1[:, 0]
        + np.sin(phase + realization.phases[:, 1]) * realization.polarizations_2[:, 0]
    )

    return float(-np.sum(realization.field_amplitudes * polarized))

@dataclass(frozen=True)
class ZpfForce:
    """
    ZPF force on a batch of oscillators in scaled units, one realization per row

    The two polarizations of each mode are folded into a single sine,
    a1 sin(p + th1) + a2 sin(p + th2) = R sin(p + psi).

    ...

    Attributes
    ----------
    wave_numbers: np.ndarray
        (batch, n_modes) x-component of k in inverse oscillator lengths
    frequencies: np.ndarray
        (batch, n_modes) omega / omega0
    amplitudes: np.ndarray
        (batch, n_modes) R in units of m * omega0^2 * l
    phases: np.ndarray
        (batch, n_modes) psi

    """

    wave_numbers: np.ndarray
    frequencies: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray

    @classmethod
    def from_realizations(
        cls,
        realizations: List[ZpfRealization],
        coupling: float,
        length_unit: float,
        omega0: float,
        at_origin: bool=False
    ) -> "ZpfForce":
        """
        Scales sampled realizations into per-mode force terms

        :param List[ZpfRealization] realizations: one per trajectory in the batch
        :param float coupling: q / (m omega0^2 l), converts V/m into scaled force
        :param float length_unit: oscillator length l in m
        :param float omega0: natural frequency in rad/s
        :param bool at_origin: drop the k.x dependence of the field
        :return: the batched force
        """
        if not realizations:
            raise InvalidParameterError("a ZPF force needs at least one realization")

        field = np.stack([r.field_amplitudes for r in realizations])
        eps_1x = np.stack([r.polarizations_1[:, 0] for r in realizations])
        eps_2x = np.stack([r.polarizations_2[:, 0] for r in realizations])
        theta_1 = np.stack([r.phases[:, 0] for r in realizations])
        theta_2 = np.stack([r.phases[:, 1] for r in realizations])

        combined = (
            eps_1x * np.exp(1j * theta_1) + eps_2x * np.exp(1j * theta_2)
        ) * coupling * field

        wave_numbers = np.stack([r.wave_vectors[:, 0] for r in realizations]) * length_unit
        if at_origin:
            wave_numbers = np.zeros_like(wave_numbers)

        return cls(
            wave_numbers=wave_numbers,
            frequencies=np.stack([r.angular_frequencies for r in realizations]) / omega0,
            amplitudes=np.abs(combined),
            phases=np.angle(combined),
        )

    @property
    def batch_size(self) -> int:
        return int(self.amplitudes.shape[0])

    def __call__(self, x: np.ndarray, t: float) -> np.ndarray:
        phase = self.wave_numbers * x[:, None] - self.frequencies * t + self.phases
        return -np.sum(self.amplitudes * np.sin(phase), axis=1)
