import logging
import math

from dataclasses import (
    dataclass,
)

from enum import (
    Enum,
)

from functools import (
    partial,
)

from typing import (
    Dict,
    List,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np

from scipy.optimize import (
    brentq,
)

from scipy.signal import (
    find_peaks as find_local_maxima,
    peak_widths,
)

from classical import (
    ZPF_EQUILIBRIUM_ENERGY,
    RelaxedBatch,
    ensemble_average,
    extrapolate_to_pulse_center,
    prepare_ensemble,
)

from constants import (
    InvalidParameterError,
)

from oscillator import (
    ScaledProblem,
    max_time_step,
)

from qm import (
    QmState,
    energy_expectation,
    pulse_excitation,
)

from schedule import (
    schedule,
)

logger = logging.getLogger(__name__)

DEFAULT_GRID: Tuple[float, float, int] = (0.5, 3.5, 61)

DEFAULT_ANGLES: List[float] = [0.0, math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2]

# Peaks must exceed the baseline by this many noise units
PEAK_SIGNIFICANCE = 5.0

MIN_PEAK_POINTS = 5

# Refinement: grid step divided by REFINE_FACTOR within REFINE_HALF_WIDTH of a peak
REFINE_FACTOR = 4
REFINE_HALF_WIDTH = 0.05

CALIBRATION_TARGET = 1.5
CALIBRATION_FREQUENCY = 1.0
CALIBRATION_ANGLE = math.pi / 4

# Doublings or halvings tried while bracketing the calibrated amplitude
MAX_BRACKET_STEPS = 20

class Source(Enum):
    QUANTUM = 'quantum'
    CLASSICAL_ZPF = 'classical-zpf'
    CLASSICAL_BARE = 'classical-bare'

class SpectrumError(Exception):
    """
    Exception class for spectra that cannot be analysed or compared

    ...

    Attributes
    ----------
    expression: str
    message: str

    """

    expression: str
    message: str

    def __init__(self, expression: str) -> None:
        self.expression = expression
        self.message = "Invalid spectrum: "

    def __str__(self) -> str:

        return f'{self.message} {self.expression}'

@dataclass(frozen=True)
class SpectrumPoint:
    """
    Post-pulse energy at one pulse carrier frequency

    ...

    Attributes
    ----------
    frequency_ratio: float
        omega_p / omega0
    mean_energy: float
        hbar omega0
    standard_error: float
        hbar omega0, zero for deterministic sources
    source: Source
    theta: float
        pulse angle in rad

    """

    frequency_ratio: float
    mean_energy: float
    standard_error: float
    source: Source
    theta: float

@dataclass(frozen=True)
class PeakReport:
    """
    Resonances of one spectrum

    ...

    Attributes
    ----------
    positions: List[float]
        omega_p / omega0, ascending
    heights: List[float]
        hbar omega0
    widths: List[float]
        full width at half prominence, in omega_p / omega0
    baseline: float
        hbar omega0
    threshold: float
        smallest height a peak may have

    """

    positions: List[float]
    heights: List[float]
    widths: List[float]
    baseline: float
    threshold: float

    def __len__(self) -> int:
        return len(self.positions)

@dataclass(frozen=True)
class PeakMatch:
    position_a: float
    position_b: float
    position_difference: float
    height_ratio: float

@dataclass(frozen=True)
class ComparisonReport:
    """
    Peak-by-peak and pointwise agreement of two spectra on one grid

    ...

    Attributes
    ----------
    matches: List[PeakMatch]
    unmatched_a: List[float]
    unmatched_b: List[float]
    weighted_rms: float
    weighted: bool
        False when a zero combined variance forced an unweighted RMS

    """

    matches: List[PeakMatch]
    unmatched_a: List[float]
    unmatched_b: List[float]
    weighted_rms: float
    weighted: bool

def frequency_grid(start: float, stop: float, count: int) -> List[float]:

    if count < 1 or start <= 0 or stop < start:
        raise InvalidParameterError(
            f"frequency grid {start!r}:{stop!r}:{count} must be positive and ascending"
        )

    return [float(f) for f in np.linspace(start, stop, count)]

def _check_frequencies(
    problem: ScaledProblem,
    frequencies: Sequence[float],
    source: Source
) -> None:

    if len(frequencies) == 0:
        raise InvalidParameterError("at least one pulse frequency is needed")

    if min(frequencies) <= 0:
        raise InvalidParameterError("pulse frequencies must be positive")

    highest = max(max(frequencies), problem.zpf.omega_max / problem.units.omega0)
    step = problem.qm_time_step if source is Source.QUANTUM else problem.time_step

    if step >= max_time_step(highest):
        raise InvalidParameterError(
            f"step {step!r} does not resolve pulse frequency {highest!r} omega0"
        )

def quantum_point(
    problem: ScaledProblem,
    frequency: float
) -> Tuple[SpectrumPoint, QmState]:
    """
    Quantum energy after a pulse with the given carrier

    :param ScaledProblem problem: the scaled run with a calibrated amplitude
    :param float frequency: omega_p / omega0
    :return: the spectrum point and the final state
    """
    pulse = problem.pulse.with_frequency(frequency)
    state = pulse_excitation(
        pulse,
        problem.qm_levels,
        problem.expansion_order,
        problem.qm_time_step
    )

    point = SpectrumPoint(
        frequency_ratio=frequency,
        mean_energy=energy_expectation(state),
        standard_error=0.0,
        source=Source.QUANTUM,
        theta=pulse.angle,
    )

    return point, state

def classical_point(
    problem: ScaledProblem,
    relaxed: List[RelaxedBatch],
    source: Source,
    frequency: float
) -> SpectrumPoint:
    """
    Ensemble energy after a pulse with the given carrier, from relaxed batches

    The window-averaged energy is carried back to the pulse centre so that
    classical and quantum heights compare without the damping loss.

    :param ScaledProblem problem: the scaled run with a calibrated amplitude
    :param List[RelaxedBatch] relaxed: batches shared by every scan point
    :param Source source: classical-zpf or classical-bare
    :param float frequency: omega_p / omega0
    :return: the spectrum point
    """
    zpf = source is Source.CLASSICAL_ZPF
    pulse = problem.pulse.with_frequency(frequency)

    estimate = ensemble_average(
        problem,
        pulse,
        problem.master_seed,
        problem.ensemble_size,
        zpf=zpf,
        relaxed=relaxed
    )

    estimate = extrapolate_to_pulse_center(
        estimate,
        problem.gamma,
        pulse.center,
        ZPF_EQUILIBRIUM_ENERGY if zpf else 0.0
    )

    return SpectrumPoint(
        frequency_ratio=frequency,
        mean_energy=estimate.mean,
        standard_error=estimate.standard_error,
        source=source,
        theta=pulse.angle,
    )

def ensure_amplitude(problem: ScaledProblem) -> ScaledProblem:
    """Calibrates an 'auto' pulse amplitude; explicit amplitudes pass through."""
    if problem.pulse.amplitude is not None:
        return problem

    amplitude = calibrate_amplitude(problem)
    return problem.with_pulse(problem.pulse.with_amplitude(amplitude))

def quantum_scan(
    problem: ScaledProblem,
    frequencies: Sequence[float],
    jobs: int=1
) -> List[Tuple[SpectrumPoint, QmState]]:
    """
    Quantum spectrum with the final state of every point

    :param ScaledProblem problem: the scaled run
    :param Sequence[float] frequencies: omega_p / omega0
    :param int jobs: worker processes
    :return: (point, state) per frequency, in input order
    """
    _check_frequencies(problem, frequencies, Source.QUANTUM)
    problem = ensure_amplitude(problem)

    return schedule(partial(quantum_point, problem), list(frequencies), jobs)

def scan(
    problem: ScaledProblem,
    frequencies: Sequence[float],
    source: Source,
    jobs: int=1,
    relaxed: Optional[List[RelaxedBatch]]=None
) -> List[SpectrumPoint]:
    """
    Excitation spectrum of one source over pulse frequencies

    Every point shares the problem's pulse except for the carrier. Classical
    sources relax the ensemble once and reuse it for every frequency.

    :param ScaledProblem problem: the scaled run
    :param Sequence[float] frequencies: omega_p / omega0
    :param Source source: which theory to run
    :param int jobs: worker processes
    :param relaxed: batches from prepare_ensemble to reuse
    :return: one point per frequency, in input order
    """
    if source is Source.QUANTUM:
        return [point for point, _ in quantum_scan(problem, frequencies, jobs)]

    _check_frequencies(problem, frequencies, source)
    problem = ensure_amplitude(problem)

    if relaxed is None:
        relaxed = prepare_ensemble(
            problem,
            problem.master_seed,
            problem.ensemble_size,
            zpf=source is Source.CLASSICAL_ZPF,
            jobs=jobs
        )

    return schedule(
        partial(classical_point, problem, relaxed, source),
        list(frequencies),
        jobs
    )

def refine_frequencies(
    frequencies: Sequence[float],
    peaks: PeakReport
) -> List[float]:
    """
    Frequencies to add around detected peaks, REFINE_FACTOR times denser than the grid

    :param Sequence[float] frequencies: the coarse, ascending grid
    :param PeakReport peaks: peaks detected on the coarse grid
    :return: new frequencies not already on the grid, ascending
    """
    grid = np.asarray(frequencies, dtype=float)

    if grid.shape[0] < 2 or len(peaks) == 0:
        return []

    fine_step = float(np.min(np.diff(grid))) / REFINE_FACTOR
    reach = int(math.floor(REFINE_HALF_WIDTH / fine_step + 1e-9))

    extra: List[float] = []

    for position in peaks.positions:
        # anchor the fine grid on the nearest coarse point
        anchor = grid[int(np.argmin(np.abs(grid - position)))]

        for k in range(-reach, reach + 1):
            candidate = float(anchor + k * fine_step)

            if candidate <= 0:
                continue

            if np.any(np.isclose(grid, candidate, rtol=0.0, atol=1e-9)):
                continue

            if any(math.isclose(candidate, e, abs_tol=1e-9) for e in extra):
                continue

            extra.append(candidate)

    return sorted(extra)

def refined_scan(
    problem: ScaledProblem,
    frequencies: Sequence[float],
    source: Source,
    jobs: int=1
) -> List[SpectrumPoint]:
    """
    Coarse scan followed by a denser scan around each detected peak

    :return: coarse and refined points merged in ascending frequency
    """
    problem = ensure_amplitude(problem)

    relaxed = None
    if source is not Source.QUANTUM:
        relaxed = prepare_ensemble(
            problem,
            problem.master_seed,
            problem.ensemble_size,
            zpf=source is Source.CLASSICAL_ZPF,
            jobs=jobs
        )

    coarse = scan(problem, frequencies, source, jobs, relaxed)

    if len(coarse) < MIN_PEAK_POINTS:
        return coarse

    extra = refine_frequencies(frequencies, find_peaks(coarse))

    if not extra:
        return coarse

    logger.info("Refining %s spectrum with %d extra frequencies", source.value, len(extra))

    fine = scan(problem, extra, source, jobs, relaxed)

    return sorted(coarse + fine, key=lambda point: point.frequency_ratio)

def find_peaks(spectrum: Sequence[SpectrumPoint]) -> PeakReport:
    """
    Resonances of a spectrum on a monotone frequency grid

    The baseline is the median energy. A local maximum counts as a peak when
    it exceeds baseline + 5 * max(standard_error, 0.02 * baseline,
    1e-3 * (max - baseline)). Centres are refined by a parabola through the
    maximum and its neighbours; widths come from half-prominence crossings.

    :param spectrum: points of one source, ascending in frequency
    :return: the peak report
    :raises SpectrumError: fewer than 5 points or a non-monotone grid
    """
    if len(spectrum) < MIN_PEAK_POINTS:
        raise SpectrumError(
            f"peak detection needs at least {MIN_PEAK_POINTS} points, got {len(spectrum)}"
        )

    frequencies = np.array([p.frequency_ratio for p in spectrum])
    energies = np.array([p.mean_energy for p in spectrum])
    errors = np.array([p.standard_error for p in spectrum])

    if np.any(np.diff(frequencies) <= 0):
        raise SpectrumError("frequency grid is not strictly ascending")

    baseline = float(np.median(energies))
    span = float(np.max(energies)) - baseline
    noise = np.maximum(errors, max(0.02 * baseline, 1e-3 * span))
    thresholds = baseline + PEAK_SIGNIFICANCE * noise

    indices, _ = find_local_maxima(energies, height=thresholds)

    positions: List[float] = []
    heights: List[float] = []
    widths: List[float] = []

    if indices.shape[0] > 0:
        _, _, left_ips, right_ips = peak_widths(energies, indices, rel_height=0.5)
        sample_index = np.arange(frequencies.shape[0])
        left = np.interp(left_ips, sample_index, frequencies)
        right = np.interp(right_ips, sample_index, frequencies)

        for k, i in enumerate(indices):
            positions.append(_parabolic_centre(frequencies, energies, int(i)))
            heights.append(float(energies[i]))
            widths.append(float(right[k] - left[k]))

    return PeakReport(
        positions=positions,
        heights=heights,
        widths=widths,
        baseline=baseline,
        threshold=float(baseline + PEAK_SIGNIFICANCE * max(0.02 * baseline, 1e-3 * span)),
    )

def _parabolic_centre(frequencies: np.ndarray, energies: np.ndarray, i: int) -> float:
    x = frequencies[i - 1:i + 2]
    y = energies[i - 1:i + 2]
    a, b, _ = np.polyfit(x - x[1], y, 2)

    if a >= 0:
        return float(x[1])

    # vertex stays between the neighbours
    offset = float(np.clip(-b / (2.0 * a), x[0] - x[1], x[2] - x[1]))
    return float(x[1] + offset)

def compare_spectra(
    a: Sequence[SpectrumPoint],
    b: Sequence[SpectrumPoint],
    tolerance: float=0.25
) -> ComparisonReport:
    """
    Compares two spectra on the same grid

    Peaks of a are matched to the nearest peak of b within `tolerance`;
    heights are compared above each spectrum's own baseline. The RMS
    difference is weighted by 1 / (sigma_a^2 + sigma_b^2).

    :param a: reference spectrum
    :param b: compared spectrum
    :param float tolerance: largest position difference of a match, omega_p / omega0
    :return: the comparison report
    :raises SpectrumError: the grids differ
    """
    frequencies_a = np.array([p.frequency_ratio for p in a])
    frequencies_b = np.array([p.frequency_ratio for p in b])

    if frequencies_a.shape != frequencies_b.shape or not np.array_equal(frequencies_a, frequencies_b):
        raise SpectrumError("spectra are not on the same frequency grid")

    energies_a = np.array([p.mean_energy for p in a])
    energies_b = np.array([p.mean_energy for p in b])
    variance = (
        np.array([p.standard_error for p in a]) ** 2
        + np.array([p.standard_error for p in b]) ** 2
    )

    squared = (energies_a - energies_b) ** 2
    weighted = bool(np.all(variance > 0))

    if weighted:
        weights = 1.0 / variance
        rms = math.sqrt(float(np.sum(weights * squared) / np.sum(weights)))
    else:
        rms = math.sqrt(float(np.mean(squared)))

    peaks_a = find_peaks(a)
    peaks_b = find_peaks(b)

    matches: List[PeakMatch] = []
    used: List[int] = []

    for position, height in zip(peaks_a.positions, peaks_a.heights):
        candidates = [
            (abs(other - position), j)
            for j, other in enumerate(peaks_b.positions)
            if j not in used and abs(other - position) <= tolerance
        ]

        if not candidates:
            continue

        _, j = min(candidates)
        used.append(j)

        above_a = height - peaks_a.baseline
        above_b = peaks_b.heights[j] - peaks_b.baseline

        matches.append(PeakMatch(
            position_a=position,
            position_b=peaks_b.positions[j],
            position_difference=peaks_b.positions[j] - position,
            height_ratio=above_b / above_a,
        ))

    matched_a = [m.position_a for m in matches]

    return ComparisonReport(
        matches=matches,
        unmatched_a=[p for p in peaks_a.positions if p not in matched_a],
        unmatched_b=[p for j, p in enumerate(peaks_b.positions) if j not in used],
        weighted_rms=rms,
        weighted=weighted,
    )

def angle_sweep(
    problem: ScaledProblem,
    angles: Sequence[float],
    frequencies: Sequence[float],
    sources: Sequence[Source]=(Source.QUANTUM, Source.CLASSICAL_ZPF),
    jobs: int=1
) -> Dict[float, List[SpectrumPoint]]:
    """
    Spectra at several pulse angles

    The amplitude is calibrated once, at the calibration angle, and the
    relaxed classical ensemble is shared by every angle.

    :param ScaledProblem problem: the scaled run
    :param angles: pulse angles in [0, pi/2]
    :param frequencies: omega_p / omega0
    :param sources: theories to run per angle
    :param int jobs: worker processes
    :return: angle to the concatenated spectra of every source
    """
    for angle in angles:

        if not 0.0 <= angle <= 0.5 * math.pi:
            raise InvalidParameterError(f"pulse angle {angle!r} is outside [0, pi/2]")

    problem = ensure_amplitude(problem)

    relaxed: Dict[Source, List[RelaxedBatch]] = {}
    for source in sources:

        if source is not Source.QUANTUM:
            relaxed[source] = prepare_ensemble(
                problem,
                problem.master_seed,
                problem.ensemble_size,
                zpf=source is Source.CLASSICAL_ZPF,
                jobs=jobs
            )

    spectra: Dict[float, List[SpectrumPoint]] = {}

    for angle in angles:
        angled = problem.with_pulse(problem.pulse.with_angle(angle))
        points: List[SpectrumPoint] = []

        for source in sources:
            points.extend(scan(angled, frequencies, source, jobs, relaxed.get(source)))

        spectra[angle] = points

    return spectra

def _calibration_energy(problem: ScaledProblem, amplitude: float) -> float:
    pulse = problem.pulse.with_frequency(CALIBRATION_FREQUENCY) \
        .with_angle(CALIBRATION_ANGLE) \
        .with_amplitude(amplitude)

    state = pulse_excitation(
        pulse,
        problem.qm_levels,
        problem.expansion_order,
        problem.qm_time_step
    )

    return energy_expectation(state)

def calibrate_amplitude(
    problem: ScaledProblem,
    target: float=CALIBRATION_TARGET
) -> float:
    """
    Pulse amplitude that leaves the quantum oscillator with `target` energy
    after a resonant pulse at the calibration angle

    The first-order dipole estimate sqrt(8 (target - 1/2) / pi) / (Delta t cos theta)
    seeds a bracket that is widened until it holds the root, then Brent's
    method finishes.

    :param ScaledProblem problem: the scaled run
    :param float target: energy in hbar omega0, above the ground energy
    :return: dimensionless amplitude
    """
    if target <= 0.5:
        raise InvalidParameterError(f"calibration target {target!r} must exceed 0.5")

    width = problem.pulse.width
    guess = math.sqrt(8.0 * (target - 0.5) / math.pi) / (width * math.cos(CALIBRATION_ANGLE))

    cache: Dict[float, float] = {}

    def excess(amplitude: float) -> float:

        if amplitude not in cache:
            cache[amplitude] = _calibration_energy(problem, amplitude) - target

        return cache[amplitude]

    low, high = 0.5 * guess, guess

    for _ in range(MAX_BRACKET_STEPS):

        if excess(high) >= 0:
            break

        low, high = high, 2.0 * high

    for _ in range(MAX_BRACKET_STEPS):

        if excess(low) <= 0:
            break

        low, high = 0.5 * low, low

    if excess(low) > 0 or excess(high) < 0:
        raise InvalidParameterError(
            f"no pulse amplitude in [{low!r}, {high!r}] reaches energy {target!r}"
        )

    amplitude = float(brentq(excess, low, high, xtol=1e-6 * guess))

    logger.info(
        "Calibrated pulse amplitude %r (first-order estimate %r, %d quantum runs)",
        amplitude,
        guess,
        len(cache)
    )

    return amplitude
