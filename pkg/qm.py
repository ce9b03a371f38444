import logging
import math

from dataclasses import (
    dataclass,
)

from typing import (
    Callable,
    Tuple,
)

import numpy as np

from constants import (
    HBAR,
    InvalidParameterError,
)

from pulse import (
    ScaledPulse,
)

logger = logging.getLogger(__name__)

# Largest tolerated |sum |c_n|^2 - 1| after a propagation
NORM_DRIFT_LIMIT = 1e-4

HamiltonianFunction = Callable[[float], np.ndarray]

class NormDriftError(Exception):
    """
    Exception class for propagations that lost unitarity

    ...

    Attributes
    ----------
    drift: float
    dt: float
    message: str

    """

    drift: float
    dt: float
    message: str

    def __init__(self, drift: float, dt: float) -> None:
        self.drift = drift
        self.dt = dt
        self.message = "Norm drift exceeded tolerance: "

    def __str__(self) -> str:

        return f'{self.message} |norm - 1| = {self.drift!r} with step {self.dt!r}; reduce the step size.'

def _check_levels(levels: int) -> None:

    if levels < 2:
        raise InvalidParameterError(f"at least 2 basis levels are needed, got {levels}")

def _ladder(levels: int) -> np.ndarray:
    """sqrt(n + 1) on the first off-diagonal."""
    return np.sqrt(np.arange(1, levels, dtype=float))

def scaled_position_matrix(levels: int) -> np.ndarray:
    """<n|x|m> in oscillator lengths."""
    _check_levels(levels)
    off = _ladder(levels) / math.sqrt(2.0)
    return (np.diag(off, 1) + np.diag(off, -1)).astype(complex)

def scaled_momentum_matrix(levels: int) -> np.ndarray:
    """<n|p|m> in units of hbar / l."""
    _check_levels(levels)
    off = _ladder(levels) / math.sqrt(2.0)
    return 1j * np.diag(off, -1) - 1j * np.diag(off, 1)

def position_matrix(levels: int, mass: float, omega0: float) -> np.ndarray:
    """
    Truncated position operator, sqrt(hbar / (2 m omega0)) (a + a^dagger)

    :param int levels: basis size N
    :param float mass: kg
    :param float omega0: rad/s
    :return: N x N matrix in m
    """
    return math.sqrt(HBAR / (mass * omega0)) * scaled_position_matrix(levels)

def momentum_matrix(levels: int, mass: float, omega0: float) -> np.ndarray:
    """
    Truncated momentum operator, i sqrt(hbar m omega0 / 2) (a^dagger - a)

    :param int levels: basis size N
    :param float mass: kg
    :param float omega0: rad/s
    :return: N x N matrix in kg m / s
    """
    return math.sqrt(HBAR * mass * omega0) * scaled_momentum_matrix(levels)

@dataclass(frozen=True)
class OscillatorOperators:
    """
    Scaled operators of the truncated oscillator basis

    ...

    Attributes
    ----------
    levels: int
    position: np.ndarray
    momentum: np.ndarray
    energies: np.ndarray
        n + 1/2 in hbar omega0

    """

    levels: int
    position: np.ndarray
    momentum: np.ndarray
    energies: np.ndarray

    @classmethod
    def build(cls, levels: int) -> "OscillatorOperators":
        return cls(
            levels=levels,
            position=scaled_position_matrix(levels),
            momentum=scaled_momentum_matrix(levels),
            energies=np.arange(levels) + 0.5,
        )

    def interaction_phases(self, t: float) -> np.ndarray:
        """exp(i (n - m) t), the interaction-picture factor of H'_nm."""
        rotation = np.exp(1j * np.arange(self.levels) * t)
        return np.outer(rotation, rotation.conj())

def taylor_exp_matrix(matrix: np.ndarray, order: int) -> np.ndarray:
    """
    Sum_{n=0}^{order} M^n / n! by Horner's scheme

    :param np.ndarray matrix: square matrix M
    :param int order: highest power kept
    :return: the truncated exponential series
    """
    identity = np.eye(matrix.shape[0], dtype=complex)
    result = identity.copy()

    for n in range(order, 0, -1):
        result = identity + (matrix @ result) / n

    return result

def multipole_factors(
    kx_matrix: np.ndarray,
    cycles: float,
    tau: float,
    order: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Truncated expansions of the pulse's spatial dependence

    f1 = exp(i K), f2 = exp(-(K / c)^2), f3 = exp(2 (K / c) tau), each to `order`,
    where K is the matrix of k_p . x and c = |k_p| * Delta x.

    :param np.ndarray kx_matrix: K in the truncated basis
    :param float cycles: |k_p| * Delta x = omega_p * Delta t
    :param float tau: (t - t0) / Delta t
    :param int order: expansion order
    :return: (f1, f2, f3)
    """
    if order < 0:
        raise InvalidParameterError(f"expansion order must be non-negative, got {order}")

    scaled = kx_matrix / cycles

    f1 = taylor_exp_matrix(1j * kx_matrix, order)
    f2 = taylor_exp_matrix(-(scaled @ scaled), order)
    f3 = taylor_exp_matrix(2.0 * tau * scaled, order)

    return f1, f2, f3

class PulseCoupling:
    """
    Pulse interaction H'(t) in the truncated basis, in units of hbar omega0

    The time-independent factors f1 f2 are computed once; f3 and the
    envelope are evaluated per call.

    ...

    Attributes
    ----------
    pulse: ScaledPulse
    operators: OscillatorOperators
    order: int
    kx_matrix: np.ndarray
    scaled_kx: np.ndarray
    static_factors: np.ndarray
        f1 @ f2
    """

    pulse: ScaledPulse
    operators: OscillatorOperators
    order: int
    kx_matrix: np.ndarray
    scaled_kx: np.ndarray
    static_factors: np.ndarray

    def __init__(
        self,
        pulse: ScaledPulse,
        operators: OscillatorOperators,
        order: int
    ) -> None:
        self.pulse = pulse
        self.operators = operators
        self.order = order
        self.kx_matrix = pulse.wave_number_x * operators.position

        f1, f2, _ = multipole_factors(self.kx_matrix, pulse.cycles, 0.0, order)
        self.static_factors = f1 @ f2
        self.scaled_kx = self.kx_matrix / pulse.cycles

    def vector_potential(self, t: float) -> np.ndarray:
        """Real (Hermitian) scalar part of the pulse vector potential along its polarization."""
        pulse = self.pulse
        tau = (t - pulse.center) / pulse.width

        f3 = taylor_exp_matrix(2.0 * tau * self.scaled_kx, self.order)
        complex_field = (
            pulse.require_amplitude()
            * np.exp(-1j * pulse.frequency * t)
            * math.exp(-tau * tau)
            * (self.static_factors @ f3)
        )

        return 0.5 * (complex_field + complex_field.conj().T)

    def __call__(self, t: float) -> np.ndarray:
        return hprime_matrix(self, t)

def hprime_matrix(coupling: PulseCoupling, t: float) -> np.ndarray:
    """
    H' = -eps_x A p + (A . A) / 2, symmetrized

    Only the x-component of the polarization couples to p; the A^2 term keeps
    all components.

    :param PulseCoupling coupling: the pulse and the basis
    :param float t: scaled time
    :return: Hermitian N x N matrix in hbar omega0
    """
    pulse = coupling.pulse

    if pulse.require_amplitude() == 0.0:
        return np.zeros((coupling.operators.levels, coupling.operators.levels), dtype=complex)

    potential = coupling.vector_potential(t)
    eps_x = pulse.polarization_x
    eps_z = pulse.polarization_z

    hamiltonian = (
        -eps_x * (potential @ coupling.operators.momentum)
        + 0.5 * (eps_x * eps_x + eps_z * eps_z) * (potential @ potential)
    )

    return 0.5 * (hamiltonian + hamiltonian.conj().T)

@dataclass(frozen=True)
class QmState:
    """
    Interaction-picture amplitudes c_n of the truncated oscillator

    ...

    Attributes
    ----------
    coefficients: np.ndarray
    t: float

    """

    coefficients: np.ndarray
    t: float

    @classmethod
    def ground(cls, levels: int, t: float=0.0) -> "QmState":
        coefficients = np.zeros(levels, dtype=complex)
        coefficients[0] = 1.0
        return cls(coefficients, t)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    @property
    def norm(self) -> float:
        return float(np.sum(self.probabilities))

def energy_expectation(state: QmState) -> float:
    """
    Sum_n |c_n|^2 (n + 1/2)

    :param QmState state: the state
    :return: energy in hbar omega0
    """
    levels = state.coefficients.shape[0]
    return float(np.sum(state.probabilities * (np.arange(levels) + 0.5)))

def propagate_coupling(
    initial: QmState,
    hamiltonian: HamiltonianFunction,
    t_span: Tuple[float, float],
    dt: float,
    check_norm: bool=True
) -> QmState:
    """
    RK4 integration of dc/dt = -i (H'(t) o exp(i (n - m) t)) c

    The step is shrunk so that a whole number of steps spans t_span.

    :param QmState initial: normalized state at t_span[0]
    :param HamiltonianFunction hamiltonian: H'(t) in hbar omega0
    :param t_span: (start, end) in scaled time
    :param float dt: requested step
    :param bool check_norm: raise if the norm drifts beyond NORM_DRIFT_LIMIT
    :return: state at t_span[1]
    :raises NormDriftError: the norm drifted
    """
    start, end = t_span
    n_steps = max(1, int(math.ceil((end - start) / dt - 1e-9)))
    h = (end - start) / n_steps

    operators = OscillatorOperators.build(initial.coefficients.shape[0])

    def derivative(t: float, c: np.ndarray) -> np.ndarray:
        return -1j * ((hamiltonian(t) * operators.interaction_phases(t)) @ c)

    c = initial.coefficients.astype(complex)

    for i in range(n_steps):
        t = start + i * h

        k1 = derivative(t, c)
        k2 = derivative(t + 0.5 * h, c + 0.5 * h * k1)
        k3 = derivative(t + 0.5 * h, c + 0.5 * h * k2)
        k4 = derivative(t + h, c + h * k3)

        c = c + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    final = QmState(c, end)
    drift = abs(final.norm - initial.norm)

    if check_norm and drift > NORM_DRIFT_LIMIT:
        raise NormDriftError(drift, h)

    logger.debug("Propagated %d steps of %r, norm drift %r", n_steps, h, drift)

    return final

def pulse_span(pulse: ScaledPulse) -> Tuple[float, float]:
    return (pulse.switch_on, pulse.switch_off)

def propagate(
    initial: QmState,
    pulse: ScaledPulse,
    operators: OscillatorOperators,
    dt: float,
    t_span: Tuple[float, float],
    order: int=20
) -> QmState:
    """
    Propagates the amplitudes through the pulse

    :param QmState initial: normalized state at t_span[0]
    :param ScaledPulse pulse: the excitation pulse
    :param OscillatorOperators operators: the truncated basis
    :param float dt: scaled step
    :param t_span: integration interval
    :param int order: multipole expansion order
    :return: the final state
    """
    if initial.coefficients.shape[0] != operators.levels:
        raise InvalidParameterError(
            f"state has {initial.coefficients.shape[0]} levels, operators {operators.levels}"
        )

    coupling = PulseCoupling(pulse, operators, order)
    return propagate_coupling(initial, coupling, t_span, dt)

def pulse_excitation(
    pulse: ScaledPulse,
    levels: int,
    order: int,
    dt: float
) -> QmState:
    """
    Ground state driven through the whole pulse, [t0 - 5 Delta t, t0 + 5 Delta t]

    :param ScaledPulse pulse: the excitation pulse
    :param int levels: basis size
    :param int order: multipole expansion order
    :param float dt: scaled step
    :return: the state after the pulse
    """
    span = pulse_span(pulse)
    operators = OscillatorOperators.build(levels)

    state = propagate(QmState.ground(levels, span[0]), pulse, operators, dt, span, order)

    logger.info(
        "Quantum excitation at omega_p = %r, theta_p = %r: energy %r",
        pulse.frequency,
        pulse.angle,
        energy_expectation(state)
    )

    return state
