import os

import pytest

from classical import (
    RunawayError,
)

from config_parse import (
    load_values,
)

from constants import (
    InvalidParameterError,
)

from helpers import (
    FAST_VALUES,
)

from output import (
    read_spectrum,
    write_spectrum,
)

from schedule import (
    ScheduleError,
)

from simulate import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    UsageError,
    cli_main,
    exit_code,
    parse_frequencies,
    parse_seed,
)

from spectrum import (
    Source,
    SpectrumPoint,
)

def write_config(directory, **overrides):
    values = dict(FAST_VALUES)
    values.update(overrides)
    path = os.path.join(str(directory), 'run.cfg')

    with open(path, 'w') as f:
        for key, value in values.items():
            f.write(f'{key} = {value}\n')

    return path

def lorentzian_spectrum(path, height=1.0):
    points = [
        SpectrumPoint(f, 0.5 + height / (1.0 + 100.0 * (f - 1.0) ** 2), 0.0, Source.QUANTUM, 0.7)
        for f in [0.5 + 0.05 * i for i in range(61)]
    ]
    write_spectrum(path, ['# run_id = test'], points)
    return path

def test_parse_frequencies():
    assert parse_frequencies('0.5:1.5:3') == [0.5, 1.0, 1.5]
    assert len(parse_frequencies(None)) == 61

    with pytest.raises(UsageError):
        parse_frequencies('0.5:1.5')

    with pytest.raises(UsageError):
        parse_frequencies('a:b:c')

def test_parse_seed():
    assert parse_seed(None) is None
    assert parse_seed('18446744073709551615') == 2 ** 64 - 1

    with pytest.raises(UsageError):
        parse_seed('-1')

def test_unknown_config_key_exits_with_config_error(tmp_path, capsys):
    config = tmp_path / 'bad.cfg'
    config.write_text('n_modes = 10\nwidth = 3\n')

    assert cli_main(['bare-spectrum', '--config', str(config), '--out', str(tmp_path)]) == EXIT_CONFIG
    assert "unknown key 'width'" in capsys.readouterr().err

def test_missing_config_file(tmp_path):
    assert cli_main(['bare-spectrum', '--config', str(tmp_path / 'none.cfg')]) == EXIT_CONFIG

def test_bad_frequencies_exit_with_config_error(tmp_path):
    config = write_config(tmp_path)
    assert cli_main(['bare-spectrum', '--config', config, '--frequencies', '1:2', '--out', str(tmp_path)]) == EXIT_CONFIG

def test_bad_theta_exits_with_config_error(tmp_path):
    config = write_config(tmp_path)
    assert cli_main(['bare-spectrum', '--config', config, '--theta', 'steep', '--out', str(tmp_path)]) == EXIT_CONFIG

def test_jobs_must_be_positive(tmp_path):
    config = write_config(tmp_path)
    assert cli_main(['bare-spectrum', '--config', config, '--jobs', '0']) == EXIT_CONFIG

def test_argument_errors_exit_with_config_error(tmp_path, capsys):
    assert cli_main(['bare-spectrum', '--jobs', 'many']) == EXIT_CONFIG
    assert cli_main(['spectrum']) == EXIT_CONFIG
    assert cli_main(['compare', str(tmp_path / 'a.csv')]) == EXIT_CONFIG
    assert 'usage:' in capsys.readouterr().err

def test_scheduled_failures_keep_their_exit_code():
    invalid = InvalidParameterError("ensemble size must be at least 2, got 1")
    runaway = RunawayError(3, 12.5)

    assert exit_code(ScheduleError({0: invalid}, {1: None})) == EXIT_CONFIG
    assert exit_code(ScheduleError({0: invalid, 2: runaway}, {})) == EXIT_NUMERICAL
    assert exit_code(ScheduleError({0: ScheduleError({1: invalid}, {})}, {})) == EXIT_CONFIG
    assert exit_code(ScheduleError({0: ValueError("bad")}, {})) == EXIT_NUMERICAL
    assert exit_code(runaway) == EXIT_NUMERICAL
    assert exit_code(invalid) == EXIT_CONFIG

def test_bare_spectrum_run(tmp_path):
    config = write_config(tmp_path)
    outputs = []

    for name in ('first', 'second'):
        out = str(tmp_path / name)
        code = cli_main([
            'bare-spectrum', '--config', config, '--frequencies', '0.5:2.0:16',
            '--no-refine', '--out', out,
        ])

        assert code == EXIT_OK
        assert sorted(os.listdir(out)) == ['bare_peaks.csv', 'bare_spectrum.csv', 'manifest.txt']
        outputs.append(os.path.join(out, 'bare_spectrum.csv'))

    with open(outputs[0], 'rb') as a, open(outputs[1], 'rb') as b:
        assert a.read() == b.read()

    header, points = read_spectrum(outputs[0])
    assert len(points) == 16
    assert header['subcommand'] == 'bare-spectrum'

    manifest = os.path.join(str(tmp_path / 'first'), 'manifest.txt')
    assert load_values(manifest) == load_values(config)

def test_refined_spectrum_adds_points(tmp_path):
    config = write_config(tmp_path)
    out = str(tmp_path / 'out')

    assert cli_main(['bare-spectrum', '--config', config, '--frequencies', '0.5:2.0:16', '--out', out]) == EXIT_OK

    _, points = read_spectrum(os.path.join(out, 'bare_spectrum.csv'))
    frequencies = [p.frequency_ratio for p in points]

    assert len(points) > 16
    assert frequencies == sorted(frequencies)

def test_theta_override_is_echoed(tmp_path):
    config = write_config(tmp_path)
    out = str(tmp_path / 'out')

    assert cli_main([
        'bare-spectrum', '--config', config, '--frequencies', '1:1:1', '--theta', '0.5', '--no-refine', '--out', out,
    ]) == EXIT_OK

    header, points = read_spectrum(os.path.join(out, 'bare_spectrum.csv'))
    assert header['pulse_theta_rad'] == '0.5'
    assert points[0].theta == 0.5

def test_runaway_exits_with_numerical_error(tmp_path, capsys):
    config = write_config(tmp_path, pulse_amplitude=1e9)

    code = cli_main([
        'bare-spectrum', '--config', config, '--frequencies', '1:1:1', '--no-refine', '--out', str(tmp_path / 'out'),
    ])

    assert code == EXIT_NUMERICAL
    assert 'Runaway' in capsys.readouterr().err

def test_equilibrium_run_with_dumps(tmp_path):
    config = write_config(tmp_path, pulse_amplitude=0.0)
    out = str(tmp_path / 'out')

    assert cli_main(['equilibrium', '--config', config, '--dump-zpf', '--dump-trajectory', '--out', out]) == EXIT_OK
    assert sorted(os.listdir(out)) == ['equilibrium.csv', 'manifest.txt', 'trajectory_0.csv', 'zpf_trajectory_0.csv']

def test_plot_writes_svg(tmp_path):
    spectrum = lorentzian_spectrum(str(tmp_path / 'qm_spectrum.csv'))

    assert cli_main(['plot', spectrum, '--out', str(tmp_path / 'plots')]) == EXIT_OK
    assert os.path.exists(str(tmp_path / 'plots' / 'qm_spectrum.svg'))

def test_plot_empty_spectrum_fails(tmp_path):
    path = str(tmp_path / 'empty.csv')
    write_spectrum(path, [], [])

    assert cli_main(['plot', path, '--svg', str(tmp_path / 'empty.svg')]) == EXIT_CONFIG

def test_compare_writes_report(tmp_path, capsys):
    a = lorentzian_spectrum(str(tmp_path / 'a.csv'))
    b = lorentzian_spectrum(str(tmp_path / 'b.csv'), height=2.0)

    assert cli_main(['compare', a, b, '--out', str(tmp_path)]) == EXIT_OK
    assert os.path.exists(str(tmp_path / 'comparison.csv'))
    assert 'height ratio' in capsys.readouterr().out

def test_compare_mismatched_grids_fails(tmp_path):
    a = lorentzian_spectrum(str(tmp_path / 'a.csv'))
    b = str(tmp_path / 'b.csv')
    write_spectrum(b, [], [SpectrumPoint(1.0, 1.0, 0.0, Source.QUANTUM, 0.7)])

    assert cli_main(['compare', a, b, '--out', str(tmp_path)]) == EXIT_CONFIG
