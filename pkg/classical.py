import logging
import math

from dataclasses import (
    dataclass,
    replace,
)

from functools import (
    partial,
)

from typing import (
    Callable,
    List,
    Optional,
    Tuple,
    Union,
)

import numpy as np

from oscillator import (
    ScaledProblem,
)

from pulse import (
    ScaledPulse,
)

from schedule import (
    schedule,
)

from zpf import (
    ZpfForce,
    ZpfRealization,
    sample_modes,
    trajectory_generator,
)

logger = logging.getLogger(__name__)

# |x| or |v| beyond this, in scaled units, is a runaway
RUNAWAY_LIMIT = 1e6

# Trajectories are integrated in fixed batches by index
BATCH_SIZE = 25

# Largest share of runaway trajectories an ensemble may lose
MAX_EXCLUDED_FRACTION = 0.05

# Ensemble energy of the oscillator in ZPF equilibrium, hbar omega0
ZPF_EQUILIBRIUM_ENERGY = 0.5

ArrayOrFloat = Union[float, np.ndarray]

ForceFunction = Callable[[np.ndarray, float], np.ndarray]

class RunawayError(Exception):
    """
    Exception class for a trajectory whose state left the finite, bounded region

    ...

    Attributes
    ----------
    trajectory: int
    time: float
    message: str

    """

    trajectory: int
    time: float
    message: str

    def __init__(self, trajectory: int, time: float) -> None:
        self.trajectory = trajectory
        self.time = time
        self.message = "Runaway trajectory: "

    def __str__(self) -> str:

        return f'{self.message} trajectory {self.trajectory} at scaled time {self.time!r}.'

class EnsembleFailureError(Exception):
    """
    Exception class for ensembles that lost too many trajectories to runaways

    ...

    Attributes
    ----------
    excluded: List[int]
    ensemble_size: int
    message: str

    """

    excluded: List[int]
    ensemble_size: int
    message: str

    def __init__(self, excluded: List[int], ensemble_size: int) -> None:
        self.excluded = excluded
        self.ensemble_size = ensemble_size
        self.message = "Ensemble failed: "

    def __str__(self) -> str:

        return (
            f'{self.message} {len(self.excluded)} of {self.ensemble_size} trajectories '
            f'ran away (limit {MAX_EXCLUDED_FRACTION:.0%}): {self.excluded}'
        )

@dataclass(frozen=True)
class TrajectoryState:
    """
    Scaled oscillator state; x and v may be arrays holding a batch

    ...

    Attributes
    ----------
    x: ArrayOrFloat
    v: ArrayOrFloat
    t: float

    """

    x: ArrayOrFloat
    v: ArrayOrFloat
    t: float

    @classmethod
    def at_rest(cls, batch_size: int, t: float=0.0) -> "TrajectoryState":
        return cls(np.zeros(batch_size), np.zeros(batch_size), t)

    @property
    def energy(self) -> ArrayOrFloat:
        return 0.5 * (self.v * self.v + self.x * self.x)

    def out_of_bounds(self) -> np.ndarray:
        x = np.asarray(self.x)
        v = np.asarray(self.v)

        return (
            ~np.isfinite(x) | ~np.isfinite(v)
            | (np.abs(x) > RUNAWAY_LIMIT) | (np.abs(v) > RUNAWAY_LIMIT)
        )

@dataclass(frozen=True)
class EnergyEstimate:
    """
    Ensemble- and window-averaged oscillator energy

    ...

    Attributes
    ----------
    mean: float
        hbar omega0
    standard_error: float
        hbar omega0
    ensemble_size: int
    window: Tuple[float, float]
        scaled times
    excluded: int
        runaway trajectories left out of the mean

    """

    mean: float
    standard_error: float
    ensemble_size: int
    window: Tuple[float, float]
    excluded: int = 0

@dataclass(frozen=True)
class EnergySeries:
    """
    Recorded single trajectory on the integration grid

    ...

    Attributes
    ----------
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray

    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray

    @property
    def energies(self) -> np.ndarray:
        return 0.5 * (self.velocities ** 2 + self.positions ** 2)

    def window_mean(self, window: Tuple[float, float]) -> float:
        inside = (self.times >= window[0]) & (self.times <= window[1])
        return float(np.mean(self.energies[inside]))

@dataclass(frozen=True)
class MarchResult:
    """
    Outcome of marching a batch over a number of fixed steps

    ...

    Attributes
    ----------
    state: TrajectoryState
    runaway: np.ndarray
        per trajectory, whether it was stopped
    runaway_times: np.ndarray
        time of the stop, nan for healthy trajectories
    window_means: Optional[np.ndarray]
    series: Optional[EnergySeries]
        recorded only for a batch of one

    """

    state: TrajectoryState
    runaway: np.ndarray
    runaway_times: np.ndarray
    window_means: Optional[np.ndarray]
    series: Optional[EnergySeries]

class DrivingForce:
    """
    Total scaled force of the ZPF and the pulse; the pulse acts from its switch-on time

    ...

    Attributes
    ----------
    pulse: Optional[ScaledPulse]
    zpf: Optional[ZpfForce]

    """

    pulse: Optional[ScaledPulse]
    zpf: Optional[ZpfForce]

    def __init__(
        self,
        pulse: Optional[ScaledPulse]=None,
        zpf: Optional[ZpfForce]=None
    ) -> None:
        self.pulse = pulse
        self.zpf = zpf

    def __call__(self, x: np.ndarray, t: float) -> np.ndarray:

        if self.zpf is not None:
            total = self.zpf(x, t)
        else:
            total = np.zeros_like(x)

        if self.pulse is not None and t >= self.pulse.switch_on:
            total = total + self.pulse.force(x, t)

        return total

def step_rk4(
    state: TrajectoryState,
    force: ForceFunction,
    dt: float,
    gamma: float=0.0
) -> TrajectoryState:
    """
    One classical Runge-Kutta step of x'' = -x - gamma x' + f(x, t)

    :param TrajectoryState state: current state
    :param ForceFunction force: f(x, t) in scaled units
    :param float dt: scaled step
    :param float gamma: scaled damping
    :return: the state at t + dt
    """
    x, v, t = state.x, state.v, state.t
    half = 0.5 * dt

    def acceleration(x_stage, v_stage, t_stage):
        return -x_stage - gamma * v_stage + force(x_stage, t_stage)

    k1x = v
    k1v = acceleration(x, v, t)

    k2x = v + half * k1v
    k2v = acceleration(x + half * k1x, v + half * k1v, t + half)

    k3x = v + half * k2v
    k3v = acceleration(x + half * k2x, v + half * k2v, t + half)

    k4x = v + dt * k3v
    k4v = acceleration(x + dt * k3x, v + dt * k3v, t + dt)

    return TrajectoryState(
        x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        t + dt,
    )

def march(
    state: TrajectoryState,
    force: ForceFunction,
    gamma: float,
    dt: float,
    n_steps: int,
    window: Optional[Tuple[float, float]]=None,
    trajectory_ids: Optional[np.ndarray]=None,
    record: bool=False
) -> MarchResult:
    """
    Integrates a batch for n_steps on the grid t_i = t_start + i dt

    Runaway trajectories are frozen at zero and flagged; the others
    continue unaffected.

    :param TrajectoryState state: batched initial state
    :param ForceFunction force: total scaled force
    :param float gamma: scaled damping
    :param float dt: scaled step
    :param int n_steps: number of steps
    :param window: average the energy over grid points inside this interval
    :param trajectory_ids: ids used in runaway warnings
    :param bool record: keep the full history, batch of one only
    :return: final state, runaway flags and window means
    """
    x = np.array(state.x, dtype=float, ndmin=1)
    v = np.array(state.v, dtype=float, ndmin=1)
    t_start = state.t
    batch = x.shape[0]

    if trajectory_ids is None:
        trajectory_ids = np.arange(batch)

    runaway = np.zeros(batch, dtype=bool)
    runaway_times = np.full(batch, np.nan)

    window_sum = np.zeros(batch)
    window_count = 0

    history: List[Tuple[float, float, float]] = []

    current = TrajectoryState(x, v, t_start)

    for i in range(n_steps + 1):
        t = t_start + i * dt

        if i > 0:
            current = step_rk4(current, force, dt, gamma)
            current = TrajectoryState(current.x, current.v, t)

            bad = current.out_of_bounds() & ~runaway

            if bad.any():

                for index in np.flatnonzero(bad):
                    logger.warning(
                        "Trajectory %d ran away at scaled time %r and is excluded",
                        int(trajectory_ids[index]),
                        t
                    )

                runaway |= bad
                runaway_times[bad] = t

            if runaway.any():
                current = TrajectoryState(
                    np.where(runaway, 0.0, current.x),
                    np.where(runaway, 0.0, current.v),
                    t
                )

        if window is not None and window[0] <= t <= window[1]:
            window_sum += current.energy
            window_count += 1

        if record:
            history.append((t, float(current.x[0]), float(current.v[0])))

    window_means = None
    if window is not None and window_count > 0:
        window_means = window_sum / window_count

    series = None
    if record:
        recorded = np.array(history)
        series = EnergySeries(recorded[:, 0], recorded[:, 1], recorded[:, 2])

    return MarchResult(current, runaway, runaway_times, window_means, series)

def steps_between(t_start: float, t_end: float, dt: float) -> int:
    """Number of grid steps from t_start that reach or pass t_end."""
    return max(0, int(math.ceil((t_end - t_start) / dt - 1e-9)))

def run_trajectory(
    problem: ScaledProblem,
    realization: Optional[ZpfRealization],
    pulse: Optional[ScaledPulse],
    trajectory_id: int=0,
    initial: Optional[TrajectoryState]=None
) -> EnergySeries:
    """
    Integrates one trajectory from its initial state to the problem's total time

    :param ScaledProblem problem: the scaled run
    :param Optional[ZpfRealization] realization: sampled ZPF, None to switch it off
    :param Optional[ScaledPulse] pulse: the excitation pulse, None to switch it off
    :param int trajectory_id: id reported on runaway
    :param Optional[TrajectoryState] initial: starting state, at rest at t = 0 by default
    :return: the recorded series with E = (x^2 + v^2) / 2
    :raises RunawayError: the state left the finite, bounded region
    """
    if initial is None:
        initial = TrajectoryState(0.0, 0.0, 0.0)

    zpf_force = None
    if realization is not None:
        zpf_force = ZpfForce.from_realizations(
            [realization],
            problem.coupling,
            problem.units.length_unit,
            problem.units.omega0,
            problem.zpf_at_origin
        )

    result = march(
        initial,
        DrivingForce(pulse, zpf_force),
        problem.gamma,
        problem.time_step,
        steps_between(initial.t, problem.total_time, problem.time_step),
        trajectory_ids=np.array([trajectory_id]),
        record=True
    )

    if result.runaway[0]:
        raise RunawayError(trajectory_id, float(result.runaway_times[0]))

    assert result.series is not None
    return result.series

@dataclass(frozen=True)
class RelaxedBatch:
    """
    A batch of trajectories brought to ZPF equilibrium before the pulse

    ...

    Attributes
    ----------
    first_trajectory: int
    force: Optional[ZpfForce]
        None for a field-free batch
    state: TrajectoryState
    runaway: np.ndarray

    """

    first_trajectory: int
    force: Optional[ZpfForce]
    state: TrajectoryState
    runaway: np.ndarray

    @property
    def size(self) -> int:
        return int(self.runaway.shape[0])

    @property
    def trajectory_ids(self) -> np.ndarray:
        return self.first_trajectory + np.arange(self.size)

def relax_batch(
    problem: ScaledProblem,
    first_trajectory: int,
    master_seed: int,
    ensemble_size: int
) -> RelaxedBatch:
    """
    Samples one ZPF realization per trajectory of a batch and relaxes the batch
    from rest up to the pulse switch-on time

    :param ScaledProblem problem: the scaled run
    :param int first_trajectory: index of the first trajectory in the batch
    :param int master_seed: the run's seed
    :param int ensemble_size: total number of trajectories
    :return: the relaxed batch
    """
    count = min(BATCH_SIZE, ensemble_size - first_trajectory)
    ids = first_trajectory + np.arange(count)

    realizations = [
        sample_modes(problem.zpf, trajectory_generator(master_seed, int(i)))
        for i in ids
    ]

    force = ZpfForce.from_realizations(
        realizations,
        problem.coupling,
        problem.units.length_unit,
        problem.units.omega0,
        problem.zpf_at_origin
    )

    n_steps = max(0, int(round(problem.pulse.switch_on / problem.time_step)))

    result = march(
        TrajectoryState.at_rest(count),
        DrivingForce(None, force),
        problem.gamma,
        problem.time_step,
        n_steps,
        trajectory_ids=ids
    )

    logger.info(
        "Relaxed trajectories %d-%d up to scaled time %r",
        int(ids[0]),
        int(ids[-1]),
        result.state.t
    )

    return RelaxedBatch(first_trajectory, force, result.state, result.runaway)

def field_free_batch(problem: ScaledProblem) -> RelaxedBatch:
    """
    A single trajectory at rest on the grid point just before the pulse switches on

    Without the ZPF every trajectory of an ensemble is identical.
    """
    start = max(0, int(math.floor(problem.pulse.switch_on / problem.time_step)))

    return RelaxedBatch(
        first_trajectory=0,
        force=None,
        state=TrajectoryState.at_rest(1, start * problem.time_step),
        runaway=np.zeros(1, dtype=bool),
    )

def prepare_ensemble(
    problem: ScaledProblem,
    master_seed: int,
    ensemble_size: int,
    zpf: bool=True,
    jobs: int=1
) -> List[RelaxedBatch]:
    """
    Relaxes the whole ensemble, batch by batch in trajectory order

    The relaxed batches are independent of the pulse carrier and angle and
    are reused for every point of a scan.

    :param ScaledProblem problem: the scaled run
    :param int master_seed: the run's seed
    :param int ensemble_size: number of trajectories
    :param bool zpf: sample the ZPF; without it one field-free trajectory is used
    :param int jobs: worker processes
    :return: relaxed batches ordered by first trajectory
    """
    if not zpf:
        return [field_free_batch(problem)]

    if problem.relaxation_time > problem.pulse.switch_on:
        logger.warning(
            "Pulse switches on at scaled time %r, before the relaxation time %r",
            problem.pulse.switch_on,
            problem.relaxation_time
        )

    starts = list(range(0, ensemble_size, BATCH_SIZE))

    return schedule(
        partial(
            relax_batch,
            problem,
            master_seed=master_seed,
            ensemble_size=ensemble_size
        ),
        starts,
        jobs
    )

def measure_batch(
    problem: ScaledProblem,
    relaxed: RelaxedBatch,
    pulse: ScaledPulse
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Continues a relaxed batch through the pulse and averages its energy over the
    measurement window

    :param ScaledProblem problem: the scaled run, whose window follows the pulse
    :param RelaxedBatch relaxed: batch relaxed up to the pulse switch-on
    :param ScaledPulse pulse: the excitation pulse
    :return: (window mean per trajectory, runaway flag per trajectory)
    """
    pulse.require_amplitude()

    window = problem.measurement_window
    n_steps = steps_between(relaxed.state.t, window[1], problem.time_step)

    result = march(
        relaxed.state,
        DrivingForce(pulse, relaxed.force),
        problem.gamma,
        problem.time_step,
        n_steps,
        window=window,
        trajectory_ids=relaxed.trajectory_ids
    )

    assert result.window_means is not None
    return result.window_means, relaxed.runaway | result.runaway

def reduce_ensemble(
    means: np.ndarray,
    runaway: np.ndarray,
    window: Tuple[float, float],
    ensemble_size: int
) -> EnergyEstimate:
    """
    Averages per-trajectory means in trajectory order

    :raises EnsembleFailureError: more than MAX_EXCLUDED_FRACTION ran away
    """
    excluded = [int(i) for i in np.flatnonzero(runaway)]

    if len(excluded) > MAX_EXCLUDED_FRACTION * ensemble_size:
        raise EnsembleFailureError(excluded, ensemble_size)

    kept = means[~runaway]

    if kept.shape[0] < 2:
        raise EnsembleFailureError(excluded, ensemble_size)

    return EnergyEstimate(
        mean=float(np.mean(kept)),
        standard_error=float(np.std(kept, ddof=1) / math.sqrt(kept.shape[0])),
        ensemble_size=ensemble_size,
        window=window,
        excluded=len(excluded),
    )

def ensemble_average(
    problem: ScaledProblem,
    pulse: ScaledPulse,
    master_seed: int,
    ensemble_size: int,
    zpf: bool=True,
    jobs: int=1,
    relaxed: Optional[List[RelaxedBatch]]=None
) -> EnergyEstimate:
    """
    Ensemble- and window-averaged energy after the pulse

    Trajectory i draws its ZPF realization from the substream (master_seed, i).
    Without the ZPF the dynamics are deterministic, so one trajectory stands in
    for the whole ensemble and the standard error is zero.

    :param ScaledProblem problem: the scaled run
    :param ScaledPulse pulse: the excitation pulse, amplitude zero for none
    :param int master_seed: the run's seed
    :param int ensemble_size: number of trajectories
    :param bool zpf: immerse the oscillator in the ZPF
    :param int jobs: worker processes for the relaxation
    :param relaxed: batches from prepare_ensemble, reused across scan points
    :return: the energy estimate
    """
    problem = problem.with_pulse(pulse)

    if relaxed is None:
        relaxed = prepare_ensemble(problem, master_seed, ensemble_size, zpf, jobs)

    measured = [measure_batch(problem, batch, pulse) for batch in relaxed]
    means = np.concatenate([m for m, _ in measured])
    runaway = np.concatenate([r for _, r in measured])

    if not zpf:

        if runaway[0]:
            raise RunawayError(0, problem.measurement_window[1])

        return EnergyEstimate(
            mean=float(means[0]),
            standard_error=0.0,
            ensemble_size=ensemble_size,
            window=problem.measurement_window,
        )

    estimate = reduce_ensemble(means, runaway, problem.measurement_window, ensemble_size)

    logger.info(
        "Ensemble energy at omega_p = %r: %r +- %r (%d excluded)",
        pulse.frequency,
        estimate.mean,
        estimate.standard_error,
        estimate.excluded
    )

    return estimate


def window_decay(gamma: float, window: Tuple[float, float], center: float) -> float:
    """
    Mean of exp(-gamma (t - center)) over the measurement window

    Once the pulse is over, the energy held above the ZPF equilibrium decays
    at the rate gamma, so this factor relates the window mean to the energy at
    the pulse centre.

    :param float gamma: scaled damping
    :param Tuple[float, float] window: scaled times
    :param float center: pulse centre, scaled time
    :return: the decay factor in (0, 1]
    """
    delay = window[0] - center
    rate_length = gamma * (window[1] - window[0])

    if rate_length == 0.0:
        return math.exp(-gamma * delay)

    return math.exp(-gamma * delay) * -math.expm1(-rate_length) / rate_length

def extrapolate_to_pulse_center(
    estimate: EnergyEstimate,
    gamma: float,
    center: float,
    baseline: float
) -> EnergyEstimate:
    """
    Energy at the pulse centre from the window-averaged estimate

    The quantum propagation has no damping, so classical spectra compare
    against it after undoing the decay of the excess over `baseline`.

    :param EnergyEstimate estimate: window-averaged ensemble energy
    :param float gamma: scaled damping
    :param float center: pulse centre, scaled time
    :param float baseline: equilibrium energy the excess decays towards, hbar omega0
    :return: the estimate with mean and standard error rescaled
    """
    decay = window_decay(gamma, estimate.window, center)

    return replace(
        estimate,
        mean=baseline + (estimate.mean - baseline) / decay,
        standard_error=estimate.standard_error / decay,
    )
