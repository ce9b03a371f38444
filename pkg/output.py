import csv
import hashlib
import logging
import os

from dataclasses import (
    dataclass,
    field,
)

from typing import (
    Dict,
    Iterable,
    List,
    Sequence,
    TextIO,
    Tuple,
)

from classical import (
    EnergyEstimate,
    EnergySeries,
)

from constants import (
    GENERATOR_ALGORITHM,
    VERSION,
    constants_echo,
)

from qm import (
    QmState,
)

from spectrum import (
    ComparisonReport,
    PeakReport,
    Source,
    SpectrumPoint,
)

from zpf import (
    ZpfRealization,
)

logger = logging.getLogger(__name__)

SPECTRUM_COLUMNS: List[str] = ['omega_ratio', 'energy_hw0', 'stderr_hw0', 'source', 'theta_p_rad']

PEAK_COLUMNS: List[str] = ['position', 'height', 'width', 'source']

EQUILIBRIUM_COLUMNS: List[str] = [
    'energy_hw0', 'stderr_hw0', 'ensemble_size', 'excluded', 'window_start', 'window_end'
]

COMPARISON_COLUMNS: List[str] = ['position_a', 'position_b', 'position_difference', 'height_ratio']

TRAJECTORY_COLUMNS: List[str] = ['t', 'x', 'v', 'E']

ZPF_COLUMNS: List[str] = [
    'kx', 'ky', 'kz', 'omega', 'e1x', 'e1y', 'e1z', 'e2x', 'e2y', 'e2z', 'phase1', 'phase2'
]

QM_COLUMNS: List[str] = ['n', 'prob', 'energy_hw0']

class SpectrumFormatError(Exception):
    """
    Exception class for spectrum CSV files that cannot be read back

    ...

    Attributes
    ----------
    expression: str
    row: int
    message: str

    """

    expression: str
    row: int
    message: str

    def __init__(self, expression: str, row: int) -> None:
        self.expression = expression
        self.row = row
        self.message = "Malformed spectrum file: "

    def __str__(self) -> str:

        return f'{self.message} {self.expression} at row {self.row}.'

def format_float(value: float) -> str:
    """Shortest decimal string that round-trips the 64-bit float."""
    return repr(float(value))

def run_id(config_lines: Sequence[str], command: Sequence[str]) -> str:
    """
    Identifier shared by a manifest and every file of its run

    :param config_lines: echoed config
    :param command: subcommand and the arguments that change outputs
    :return: 16 hex digits of a SHA-256 digest
    """
    digest = hashlib.sha256()

    for line in list(config_lines) + list(command):
        digest.update(line.encode('utf-8'))
        digest.update(b'\n')

    return digest.hexdigest()[:16]

@dataclass
class RunManifest:
    """
    Record of one CLI run

    The config echo is written as plain `key = value` lines and everything
    else as comments, so the manifest can be read back as a config file.

    ...

    Attributes
    ----------
    run_id: str
    subcommand: str
    config_lines: List[str]
    master_seed: int
    constants: Dict[str, str]
    generator: str
    version: str
    runtime_seconds: float
    outputs: List[str]
    extra: Dict[str, str]

    """

    run_id: str
    subcommand: str
    config_lines: List[str]
    master_seed: int
    constants: Dict[str, str] = field(default_factory=constants_echo)
    generator: str = GENERATOR_ALGORITHM
    version: str = VERSION
    runtime_seconds: float = 0.0
    outputs: List[str] = field(default_factory=list)
    extra: Dict[str, str] = field(default_factory=dict)

    def header_lines(self) -> List[str]:
        """Comment lines that head every CSV of the run."""
        lines = [f'# run_id = {self.run_id}', f'# subcommand = {self.subcommand}']
        lines += [f'# {line}' for line in self.config_lines]
        lines += [f'# {key} = {value}' for key, value in self.constants.items()]
        lines += [f'# {key} = {value}' for key, value in sorted(self.extra.items())]
        return lines

    def write(self, directory: str) -> str:
        path = os.path.join(directory, 'manifest.txt')

        with open(path, 'w', newline='\n') as f:
            f.write(f'# run_id = {self.run_id}\n')
            f.write(f'# subcommand = {self.subcommand}\n')

            for line in self.config_lines:
                f.write(line + '\n')

            for key, value in self.constants.items():
                f.write(f'# {key} = {value}\n')

            for key, value in sorted(self.extra.items()):
                f.write(f'# {key} = {value}\n')

            f.write(f'# master_seed_used = {self.master_seed}\n')
            f.write(f'# runtime_seconds = {self.runtime_seconds:.3f}\n')

            for output in self.outputs:
                f.write(f'# output = {output}\n')

        logger.info("Manifest written to %s", path)
        return path

def _write_csv(
    path: str,
    header: Sequence[str],
    columns: Sequence[str],
    rows: Iterable[Sequence[str]]
) -> str:

    with open(path, 'w', newline='') as f:

        for line in header:
            f.write(line + '\n')

        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        writer.writerows(rows)

    logger.info("Wrote %s", path)
    return path

def write_spectrum(path: str, header: Sequence[str], points: Sequence[SpectrumPoint]) -> str:
    rows = [
        [
            format_float(p.frequency_ratio),
            format_float(p.mean_energy),
            format_float(p.standard_error),
            p.source.value,
            format_float(p.theta),
        ]
        for p in points
    ]

    return _write_csv(path, header, SPECTRUM_COLUMNS, rows)

def write_peaks(
    path: str,
    header: Sequence[str],
    reports: Sequence[Tuple[Source, PeakReport]]
) -> str:
    rows = [
        [format_float(position), format_float(height), format_float(width), source.value]
        for source, report in reports
        for position, height, width in zip(report.positions, report.heights, report.widths)
    ]

    return _write_csv(path, header, PEAK_COLUMNS, rows)

def write_equilibrium(path: str, header: Sequence[str], estimate: EnergyEstimate) -> str:
    rows = [[
        format_float(estimate.mean),
        format_float(estimate.standard_error),
        str(estimate.ensemble_size),
        str(estimate.excluded),
        format_float(estimate.window[0]),
        format_float(estimate.window[1]),
    ]]

    return _write_csv(path, header, EQUILIBRIUM_COLUMNS, rows)

def write_comparison(path: str, header: Sequence[str], report: ComparisonReport) -> str:
    header = list(header) + [
        f'# weighted_rms = {format_float(report.weighted_rms)}',
        f'# weighted = {int(report.weighted)}',
        '# unmatched_a = ' + ' '.join(format_float(p) for p in report.unmatched_a),
        '# unmatched_b = ' + ' '.join(format_float(p) for p in report.unmatched_b),
    ]

    rows = [
        [
            format_float(m.position_a),
            format_float(m.position_b),
            format_float(m.position_difference),
            format_float(m.height_ratio),
        ]
        for m in report.matches
    ]

    return _write_csv(path, header, COMPARISON_COLUMNS, rows)

def write_trajectory(path: str, header: Sequence[str], series: EnergySeries) -> str:
    energies = series.energies
    rows = [
        [format_float(t), format_float(x), format_float(v), format_float(e)]
        for t, x, v, e in zip(series.times, series.positions, series.velocities, energies)
    ]

    return _write_csv(path, header, TRAJECTORY_COLUMNS, rows)

def write_realization(path: str, header: Sequence[str], realization: ZpfRealization) -> str:
    rows = [
        [
            format_float(value)
            for value in (
                *mode.wave_vector,
                mode.angular_frequency,
                *mode.polarization_1,
                *mode.polarization_2,
                mode.phase_1,
                mode.phase_2,
            )
        ]
        for mode in realization.modes
    ]

    return _write_csv(path, header, ZPF_COLUMNS, rows)

def write_qm_state(path: str, header: Sequence[str], state: QmState) -> str:
    rows = [
        [str(n), format_float(prob), format_float(n + 0.5)]
        for n, prob in enumerate(state.probabilities)
    ]

    return _write_csv(path, header, QM_COLUMNS, rows)

def read_spectrum_file(f: TextIO) -> Tuple[Dict[str, str], List[SpectrumPoint]]:
    """
    Reads a spectrum CSV back into points

    Rows are numbered from 1 at the top of the file, comments included.

    :param TextIO f: the open file
    :return: (header comments as key/value pairs, points in file order)
    :raises SpectrumFormatError: bad column header, field count or value
    """
    header: Dict[str, str] = {}
    points: List[SpectrumPoint] = []
    columns_seen = False

    for row_number, line in enumerate(f, start=1):
        line = line.rstrip('\n')

        if line.startswith('#'):
            key, _, value = line[1:].partition('=')
            header[key.strip()] = value.strip()
            continue

        if not line.strip():
            continue

        fields = next(csv.reader([line]))

        if not columns_seen:

            if fields != SPECTRUM_COLUMNS:
                raise SpectrumFormatError(
                    f"expected columns {','.join(SPECTRUM_COLUMNS)}, found {line!r}",
                    row_number
                )

            columns_seen = True
            continue

        if len(fields) != len(SPECTRUM_COLUMNS):
            raise SpectrumFormatError(
                f"expected {len(SPECTRUM_COLUMNS)} fields, found {len(fields)}",
                row_number
            )

        try:
            point = SpectrumPoint(
                frequency_ratio=float(fields[0]),
                mean_energy=float(fields[1]),
                standard_error=float(fields[2]),
                source=Source(fields[3]),
                theta=float(fields[4]),
            )
        except ValueError as error:
            raise SpectrumFormatError(str(error), row_number)

        points.append(point)

    if not columns_seen:
        raise SpectrumFormatError("missing column header", 0)

    return header, points

def read_spectrum(path: str) -> Tuple[Dict[str, str], List[SpectrumPoint]]:

    with open(path, 'r') as f:
        return read_spectrum_file(f)

def split_by_source(points: Sequence[SpectrumPoint]) -> Dict[Tuple[Source, float], List[SpectrumPoint]]:
    """Groups points by (source, angle), each group in ascending frequency."""
    groups: Dict[Tuple[Source, float], List[SpectrumPoint]] = {}

    for point in points:
        groups.setdefault((point.source, point.theta), []).append(point)

    return {
        key: sorted(group, key=lambda p: p.frequency_ratio)
        for key, group in groups.items()
    }
