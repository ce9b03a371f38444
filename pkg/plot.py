import logging
import sys

from typing import (
    Dict,
    List,
    Sequence,
    Tuple,
)

import matplotlib

matplotlib.use('Agg')

from matplotlib.figure import (
    Figure,
)

from output import (
    SpectrumFormatError,
    read_spectrum,
    split_by_source,
)

from spectrum import (
    Source,
    SpectrumPoint,
)

logger = logging.getLogger(__name__)

# Fixed ids inside the SVG so identical spectra give identical files
matplotlib.rcParams['svg.hashsalt'] = 'zpf-spectrum'
matplotlib.rcParams['svg.fonttype'] = 'path'

SOURCE_STYLES: Dict[Source, Dict[str, str]] = {
    Source.QUANTUM: {'color': 'tab:blue', 'linestyle': '-', 'marker': 'o'},
    Source.CLASSICAL_ZPF: {'color': 'tab:red', 'linestyle': '--', 'marker': 's'},
    Source.CLASSICAL_BARE: {'color': 'tab:gray', 'linestyle': ':', 'marker': '^'},
}

SOURCE_LABELS: Dict[Source, str] = {
    Source.QUANTUM: 'quantum',
    Source.CLASSICAL_ZPF: 'classical + ZPF',
    Source.CLASSICAL_BARE: 'classical, no ZPF',
}

class PlotError(Exception):
    """
    Exception class for spectra that cannot be drawn

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
        self.message = "Unable to plot: "

    def __str__(self) -> str:

        return f'{self.message} {self.expression}'

def build_figure(points: Sequence[SpectrumPoint], title: str='') -> Figure:
    """
    Line chart of energy against pulse frequency, one line per source and angle

    :param points: spectrum points of any number of sources
    :param str title: figure title
    :return: the figure
    :raises PlotError: no points
    """
    if not points:
        raise PlotError("the spectrum is empty")

    groups = split_by_source(points)
    angles = sorted({theta for _, theta in groups})

    figure = Figure(figsize=(7.0, 4.5))
    axes = figure.add_subplot(1, 1, 1)

    ordered: List[Tuple[Source, float]] = sorted(
        groups, key=lambda key: (list(Source).index(key[0]), key[1])
    )

    for source, theta in ordered:
        group = groups[(source, theta)]
        style = SOURCE_STYLES[source]

        frequencies = [p.frequency_ratio for p in group]
        energies = [p.mean_energy for p in group]
        errors = [p.standard_error for p in group]

        label = SOURCE_LABELS[source]
        if len(angles) > 1:
            label = f'{label}, theta_p = {theta:.4g} rad'

        axes.plot(
            frequencies,
            energies,
            label=label,
            color=style['color'],
            linestyle=style['linestyle'],
            marker=style['marker'],
            markersize=3,
            linewidth=1.2,
        )

        if any(e > 0 for e in errors):
            axes.errorbar(
                frequencies,
                energies,
                yerr=errors,
                fmt='none',
                ecolor=style['color'],
                elinewidth=0.8,
                capsize=0,
            )

    axes.set_xlabel(r'pulse frequency $\omega_p/\omega_0$')
    axes.set_ylabel(r'energy [$\hbar\omega_0$]')
    axes.grid(True, linewidth=0.3)
    axes.legend(loc='upper right', fontsize='small')

    if title:
        axes.set_title(title)

    figure.tight_layout()
    return figure

def emit_svg(spectrum_path: str, out_path: str) -> str:
    """
    Renders a spectrum CSV as a standalone SVG

    :param str spectrum_path: spectrum CSV
    :param str out_path: SVG file to write
    :return: out_path
    :raises SpectrumFormatError: the CSV is malformed
    :raises PlotError: the CSV holds no points
    """
    header, points = read_spectrum(spectrum_path)

    figure = build_figure(points, header.get('subcommand', ''))
    figure.savefig(out_path, format='svg', metadata={'Date': None})

    logger.info("Plotted %d points to %s", len(points), out_path)
    return out_path

def __main__():

    if len(sys.argv) < 3:
        sys.stdout.write("Usage: python plot.py [SPECTRUM_CSV] [OUT_SVG]\n")
        return

    try:
        emit_svg(sys.argv[1], sys.argv[2])
    except (SpectrumFormatError, PlotError) as error:
        sys.stderr.write(f'{error}\n')
        sys.exit(1)


if __name__ == "__main__":

    __main__()
