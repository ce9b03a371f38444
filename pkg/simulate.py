import argparse
import logging
import os
import sys
import time

from typing import (
    Callable,
    Dict,
    List,
    NoReturn,
    Optional,
    Sequence,
    Tuple,
)

import argcomplete

from classical import (
    EnsembleFailureError,
    RunawayError,
    ensemble_average,
    run_trajectory,
)

from config_lex import (
    ConfigLexError,
)

from config_parse import (
    ConfigError,
    ConfigValues,
    build_config,
    format_values,
    load_values,
)

from constants import (
    InvalidParameterError,
)

from oscillator import (
    ScaledProblem,
    nondimensionalize,
)

from output import (
    RunManifest,
    SpectrumFormatError,
    format_float,
    read_spectrum,
    run_id,
    split_by_source,
    write_comparison,
    write_equilibrium,
    write_peaks,
    write_qm_state,
    write_realization,
    write_spectrum,
    write_trajectory,
)

from plot import (
    PlotError,
    emit_svg,
)

from qm import (
    NormDriftError,
    QmState,
)

from schedule import (
    ScheduleError,
)

from spectrum import (
    DEFAULT_ANGLES,
    DEFAULT_GRID,
    MIN_PEAK_POINTS,
    PeakReport,
    Source,
    SpectrumError,
    SpectrumPoint,
    angle_sweep,
    compare_spectra,
    ensure_amplitude,
    find_peaks,
    frequency_grid,
    quantum_scan,
    refine_frequencies,
    refined_scan,
    scan,
)

from zpf import (
    sample_modes,
    trajectory_generator,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

LOG_FORMAT = '%(asctime)s %(name)s %(levelname)s %(message)s'

CONFIG_ERRORS = (
    ConfigLexError,
    ConfigError,
    InvalidParameterError,
    SpectrumFormatError,
    SpectrumError,
    PlotError,
    OSError,
)

NUMERICAL_ERRORS = (
    RunawayError,
    EnsembleFailureError,
    NormDriftError,
    ScheduleError,
)

class UsageError(Exception):
    """
    Exception class for malformed command-line values

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
        self.message = "Invalid argument: "

    def __str__(self) -> str:

        return f'{self.message} {self.expression}'

class CommandLineParser(argparse.ArgumentParser):
    """Argument parser that reports malformed arguments as a UsageError instead of exiting"""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(message)

def parse_frequencies(text: Optional[str]) -> List[float]:
    """
    Parses `start:stop:count` into an evenly spaced grid

    :param Optional[str] text: the flag value, None for the default grid
    :return: omega_p / omega0 values
    :raises UsageError: malformed value
    """
    if text is None:
        return frequency_grid(*DEFAULT_GRID)

    parts = text.split(':')

    if len(parts) != 3:
        raise UsageError(f"--frequencies expects start:stop:count, got {text!r}")

    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"--frequencies expects start:stop:count, got {text!r}")

    return frequency_grid(start, stop, count)

def parse_angle(text: str) -> float:

    try:
        return float(text)
    except ValueError:
        raise UsageError(f"--theta expects radians, got {text!r}")

def parse_angles(text: Optional[str]) -> List[float]:

    if text is None:
        return list(DEFAULT_ANGLES)

    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise UsageError(f"--angles expects comma-separated radians, got {text!r}")

def parse_seed(text: Optional[str]) -> Optional[int]:

    if text is None:
        return None

    try:
        seed = int(text)
    except ValueError:
        raise UsageError(f"--seed expects an unsigned 64-bit integer, got {text!r}")

    if not 0 <= seed < 2 ** 64:
        raise UsageError(f"--seed expects an unsigned 64-bit integer, got {text!r}")

    return seed

def build_parser() -> argparse.ArgumentParser:
    """
    Builds the argument parser with one subparser per subcommand

    :return: the parser
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', default='.', help='output directory')
    common.add_argument('--jobs', type=int, default=1, help='worker processes')
    common.add_argument('--debug', action='store_true', help='log at DEBUG level')
    common.add_argument('--verbose', action='store_true', help='log at INFO level')

    simulation = argparse.ArgumentParser(add_help=False)
    simulation.add_argument('--config', default=None, help='key = value config file')
    simulation.add_argument('--seed', default=None, help='master seed, overrides the config')
    simulation.add_argument('--frequencies', default=None, help='start:stop:count in omega_p / omega0')
    simulation.add_argument('--theta', default=None, help='pulse angle in rad, overrides the config')
    simulation.add_argument('--no-refine', action='store_true', help='skip grid refinement around peaks')
    simulation.add_argument('--dump-zpf', action='store_true', help='write the ZPF realization of trajectory 0')
    simulation.add_argument('--dump-trajectory', action='store_true', help='write the energy trace of trajectory 0')
    simulation.add_argument('--dump-qm', action='store_true', help='write final level probabilities per quantum point')

    parser = CommandLineParser(
        prog='simulate',
        description='Pulse-excitation spectra of a charged oscillator, classical in the zero-point field and quantum'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    subparsers.add_parser('equilibrium', parents=[common, simulation], help='ZPF energy without a pulse')
    subparsers.add_parser('classical-spectrum', parents=[common, simulation], help='classical spectrum in the ZPF')
    subparsers.add_parser('qm-spectrum', parents=[common, simulation], help='quantum spectrum')
    subparsers.add_parser('bare-spectrum', parents=[common, simulation], help='classical spectrum without the ZPF')

    sweep = subparsers.add_parser('angle-sweep', parents=[common, simulation], help='spectra at several pulse angles')
    sweep.add_argument('--angles', default=None, help='comma-separated pulse angles in rad')

    compare = subparsers.add_parser('compare', parents=[common], help='compare two spectrum CSVs')
    compare.add_argument('spectrum_a')
    compare.add_argument('spectrum_b')
    compare.add_argument('--source-a', default=None, choices=[s.value for s in Source])
    compare.add_argument('--source-b', default=None, choices=[s.value for s in Source])

    plot = subparsers.add_parser('plot', parents=[common], help='render a spectrum CSV as SVG')
    plot.add_argument('spectrum')
    plot.add_argument('--svg', default=None, help='SVG path, defaults to the CSV name in --out')

    return parser

def configure_logging(debug: bool, verbose: bool) -> None:
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)

class Run:
    """
    One simulation subcommand: config, scaled problem, outputs and manifest

    ...

    Attributes
    ----------
    args: argparse.Namespace
    values: ConfigValues
    problem: ScaledProblem
    manifest: RunManifest
    frequencies: List[float]
    started: float
    """

    args: argparse.Namespace
    values: ConfigValues
    problem: ScaledProblem
    manifest: RunManifest
    frequencies: List[float]
    started: float

    def __init__(self, args: argparse.Namespace) -> None:
        self.args = args
        self.started = time.perf_counter()

        overrides: ConfigValues = {}

        seed = parse_seed(args.seed)
        if seed is not None:
            overrides['master_seed'] = seed

        if args.theta is not None:
            overrides['pulse_theta_rad'] = parse_angle(args.theta)

        self.values = load_values(args.config, overrides, args.debug)
        self.problem = nondimensionalize(build_config(self.values))
        self.frequencies = parse_frequencies(args.frequencies)

        config_lines = format_values(self.values)
        command = [
            args.command,
            ','.join(format_float(f) for f in self.frequencies),
            f'refine={int(not args.no_refine)}',
            getattr(args, 'angles', None) or '',
        ]

        self.manifest = RunManifest(
            run_id=run_id(config_lines, command),
            subcommand=args.command,
            config_lines=config_lines,
            master_seed=self.problem.master_seed,
        )

        os.makedirs(args.out, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.args.out, name)

    def calibrate(self) -> None:
        self.problem = ensure_amplitude(self.problem)
        self.manifest.extra['pulse_amplitude_used'] = format_float(self.problem.pulse.require_amplitude())

    def record(self, path: str) -> None:
        self.manifest.outputs.append(os.path.basename(path))

    def write_peaks(self, name: str, points: Sequence[SpectrumPoint]) -> None:
        reports: List[Tuple[Source, PeakReport]] = []

        for (source, theta), group in split_by_source(points).items():

            if len(group) < MIN_PEAK_POINTS:
                logger.warning(
                    "Only %d %s points at theta_p = %r, peak detection skipped",
                    len(group),
                    source.value,
                    theta
                )
                continue

            report = find_peaks(group)
            reports.append((source, report))

            logger.info(
                "%s peaks at theta_p = %r: %s",
                source.value,
                theta,
                ', '.join(format_float(p) for p in report.positions) or 'none'
            )

        self.record(write_peaks(self.path(name), self.manifest.header_lines(), reports))

    def dump_classical(self, zpf: bool) -> None:
        problem = self.problem

        realization = None
        if zpf:
            realization = sample_modes(problem.zpf, trajectory_generator(problem.master_seed, 0))

        if self.args.dump_zpf and realization is not None:
            self.record(write_realization(
                self.path('zpf_trajectory_0.csv'),
                self.manifest.header_lines(),
                realization
            ))

        if self.args.dump_trajectory:
            series = run_trajectory(problem, realization, problem.pulse, trajectory_id=0)
            self.record(write_trajectory(
                self.path('trajectory_0.csv'),
                self.manifest.header_lines(),
                series
            ))

    def finish(self) -> None:
        self.manifest.runtime_seconds = time.perf_counter() - self.started
        self.manifest.write(self.args.out)

def run_equilibrium(run: Run) -> None:
    problem = run.problem
    pulse = problem.pulse.with_amplitude(0.0)
    run.problem = problem.with_pulse(pulse)

    estimate = ensemble_average(
        run.problem,
        pulse,
        problem.master_seed,
        problem.ensemble_size,
        zpf=True,
        jobs=run.args.jobs
    )

    sys.stdout.write(
        f'equilibrium energy {estimate.mean!r} +- {estimate.standard_error!r} hbar omega0\n'
    )

    run.record(write_equilibrium(run.path('equilibrium.csv'), run.manifest.header_lines(), estimate))
    run.dump_classical(zpf=True)

def _classical_spectrum(run: Run, source: Source, name: str) -> None:
    run.calibrate()

    if run.args.no_refine:
        points = scan(run.problem, run.frequencies, source, run.args.jobs)
    else:
        points = refined_scan(run.problem, run.frequencies, source, run.args.jobs)

    run.record(write_spectrum(run.path(f'{name}_spectrum.csv'), run.manifest.header_lines(), points))
    run.write_peaks(f'{name}_peaks.csv', points)
    run.dump_classical(zpf=source is Source.CLASSICAL_ZPF)

def run_classical_spectrum(run: Run) -> None:
    _classical_spectrum(run, Source.CLASSICAL_ZPF, 'classical')

def run_bare_spectrum(run: Run) -> None:
    _classical_spectrum(run, Source.CLASSICAL_BARE, 'bare')

def run_qm_spectrum(run: Run) -> None:
    run.calibrate()
    jobs = run.args.jobs

    results = quantum_scan(run.problem, run.frequencies, jobs)

    if not run.args.no_refine and len(results) >= MIN_PEAK_POINTS:
        coarse = [point for point, _ in results]
        extra = refine_frequencies(run.frequencies, find_peaks(coarse))

        if extra:
            results = results + quantum_scan(run.problem, extra, jobs)
            results.sort(key=lambda result: result[0].frequency_ratio)

    points = [point for point, _ in results]

    run.record(write_spectrum(run.path('qm_spectrum.csv'), run.manifest.header_lines(), points))
    run.write_peaks('qm_peaks.csv', points)

    if run.args.dump_qm:
        directory = run.path('qm_states')
        os.makedirs(directory, exist_ok=True)

        for index, (point, state) in enumerate(results):
            _dump_state(run, directory, index, point, state)

def _dump_state(run: Run, directory: str, index: int, point: SpectrumPoint, state: QmState) -> None:
    header = run.manifest.header_lines() + [f'# omega_ratio = {format_float(point.frequency_ratio)}']
    path = os.path.join(directory, f'qm_state_{index:03d}.csv')
    write_qm_state(path, header, state)
    run.record(os.path.join('qm_states', os.path.basename(path)))

def run_angle_sweep(run: Run) -> None:
    run.calibrate()

    angles = parse_angles(run.args.angles)
    spectra = angle_sweep(run.problem, angles, run.frequencies, jobs=run.args.jobs)

    points = [point for angle in angles for point in spectra[angle]]

    run.record(write_spectrum(run.path('angle_sweep.csv'), run.manifest.header_lines(), points))
    run.write_peaks('angle_sweep_peaks.csv', points)

def _select(points: Sequence[SpectrumPoint], source: Optional[str], path: str) -> List[SpectrumPoint]:
    groups = split_by_source(points)

    if source is not None:
        groups = {key: group for key, group in groups.items() if key[0].value == source}

    if not groups:
        raise SpectrumError(f"no matching points in {path}")

    if len(groups) > 1:
        raise SpectrumError(
            f"{path} holds {len(groups)} spectra; choose one with --source-a/--source-b"
        )

    return next(iter(groups.values()))

def run_compare(args: argparse.Namespace) -> None:
    header_a, points_a = read_spectrum(args.spectrum_a)
    _, points_b = read_spectrum(args.spectrum_b)

    a = _select(points_a, args.source_a, args.spectrum_a)
    b = _select(points_b, args.source_b, args.spectrum_b)

    report = compare_spectra(a, b)

    os.makedirs(args.out, exist_ok=True)
    header = [
        f'# spectrum_a = {args.spectrum_a}',
        f'# spectrum_b = {args.spectrum_b}',
        f'# run_id_a = {header_a.get("run_id", "")}',
    ]
    write_comparison(os.path.join(args.out, 'comparison.csv'), header, report)

    for match in report.matches:
        sys.stdout.write(
            f'peak {match.position_a!r} -> {match.position_b!r}: '
            f'shift {match.position_difference!r}, height ratio {match.height_ratio!r}\n'
        )

    sys.stdout.write(f'weighted rms {report.weighted_rms!r}\n')

def run_plot(args: argparse.Namespace) -> None:
    svg = args.svg

    if svg is None:
        os.makedirs(args.out, exist_ok=True)
        base = os.path.splitext(os.path.basename(args.spectrum))[0]
        svg = os.path.join(args.out, base + '.svg')

    emit_svg(args.spectrum, svg)

SIMULATIONS: Dict[str, Callable[[Run], None]] = {
    'equilibrium': run_equilibrium,
    'classical-spectrum': run_classical_spectrum,
    'qm-spectrum': run_qm_spectrum,
    'bare-spectrum': run_bare_spectrum,
    'angle-sweep': run_angle_sweep,
}

def exit_code(error: BaseException) -> int:
    """
    Exit code of a failed run

    A scheduled failure takes the code of its causes; any numerical cause
    makes it numerical.

    :param BaseException error: the exception that ended the run
    :return: EXIT_CONFIG or EXIT_NUMERICAL
    """
    if isinstance(error, ScheduleError):
        codes = [exit_code(cause) for cause in error.failures.values()]
        return EXIT_NUMERICAL if EXIT_NUMERICAL in codes else EXIT_CONFIG

    if isinstance(error, (UsageError,) + CONFIG_ERRORS):
        return EXIT_CONFIG

    return EXIT_NUMERICAL

def cli_main(argv: Sequence[str]) -> int:
    """
    Runs one subcommand

    :param argv: arguments without the program name
    :return: 0 on success, 1 on a config or input error, 2 on a numerical failure
    """
    parser = build_parser()
    argcomplete.autocomplete(parser)

    try:
        args = parser.parse_args(list(argv))
    except UsageError as error:
        sys.stderr.write(f'{error}\n')
        return EXIT_CONFIG

    configure_logging(args.debug, args.verbose)

    if args.jobs < 1:
        sys.stderr.write(f'--jobs must be at least 1, got {args.jobs}\n')
        return EXIT_CONFIG

    try:

        if args.command == 'compare':
            run_compare(args)

        elif args.command == 'plot':
            run_plot(args)

        else:
            run = Run(args)
            SIMULATIONS[args.command](run)
            run.finish()

    except (UsageError,) + CONFIG_ERRORS + NUMERICAL_ERRORS as error:
        logger.debug("Run failed", exc_info=True)
        sys.stderr.write(f'{error}\n')
        return exit_code(error)

    return EXIT_OK

def __main__():

    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":

    __main__()
