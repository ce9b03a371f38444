import io
import math

import pytest

from config_lex import (
    ConfigLexError,
    ConfigLexer,
)

from config_parse import (
    AUTO,
    CONFIG_KEYS,
    DEFAULTS,
    ConfigError,
    ConfigParser,
    build_config,
    format_values,
    load_values,
    read_values,
    resolve_values,
)

from constants import (
    InvalidParameterError,
)

def lex(text):
    lexer = ConfigLexer()
    lexer.lex_content(io.StringIO(text))
    tokens = [lexer.get_next_token_from_queue()]

    while tokens[-1].token_name != 'EOF':
        tokens.append(lexer.get_next_token_from_queue())

    return tokens

def parse(text):
    return ConfigParser().parse(io.StringIO(text))

def test_lexer_tokens():
    tokens = lex('mass_kg = 9.11e-35  # reduced\n')

    assert [t.token_name for t in tokens] == ['IDENTIFIER', 'EQUALS', 'NUMBER', 'NEWLINE', 'NEWLINE', 'EOF']
    assert tokens[2].value == '9.11e-35'
    assert tokens[0].start_line == 1

def test_lexer_numbers():
    for text in ('1', '-0.5', '.25', '1e16', '+2.5E+3', '1.'):
        tokens = lex(text)
        assert tokens[0].token_name == 'NUMBER'
        assert tokens[0].value == text

def test_lexer_unexpected_character():
    with pytest.raises(ConfigLexError) as error:
        lex('n_modes = 10\nn_modes @ 2\n')

    assert error.value.line == 2

def test_lexer_malformed_number():
    with pytest.raises(ConfigLexError) as error:
        lex('\n\nmass_kg = 1e\n')

    assert error.value.line == 3

def test_parse_entries_and_comments():
    values = parse('# header\n\nn_modes = 10\npulse_amplitude = auto\ncharge_C = 3.2e-19')

    assert values == {'n_modes': 10, 'pulse_amplitude': AUTO, 'charge_C': 3.2e-19}
    assert isinstance(values['n_modes'], int)

def test_parse_unknown_key():
    with pytest.raises(ConfigError) as error:
        parse('n_modes = 10\nmodes = 10\n')

    assert error.value.line == 2
    assert 'modes' in str(error.value)

def test_parse_duplicate_key():
    with pytest.raises(ConfigError) as error:
        parse('n_modes = 10\n\nn_modes = 20\n')

    assert error.value.line == 3
    assert 'line 1' in error.value.expression

def test_parse_missing_value():
    with pytest.raises(ConfigError) as error:
        parse('n_modes =\n')

    assert error.value.line == 1

def test_parse_integer_key_with_float():
    with pytest.raises(ConfigError):
        parse('n_modes = 1.0\n')

def test_parse_float_key_with_word():
    with pytest.raises(ConfigError):
        parse('mass_kg = heavy\n')

def test_parse_two_entries_on_one_line():
    with pytest.raises(ConfigError):
        parse('n_modes = 10 ensemble_size = 4\n')

def test_defaults_resolved():
    values = resolve_values({})

    for key in DEFAULTS:
        assert values[key] == DEFAULTS[key]

    assert list(values) == CONFIG_KEYS
    assert values['measure_from_periods'] == 80.0
    assert values['measure_to_periods'] == 90.0
    assert values['qm_dt_periods'] == pytest.approx(0.025 / 4.0)
    assert values['total_time_periods'] == pytest.approx(
        values['pulse_center_periods'] + values['measure_to_periods']
    )

def test_default_pulse_centre_allows_relaxation():
    values = resolve_values({})
    config = build_config(values)
    gamma = config.oscillator.scaled_damping
    switch_on = config.pulse.center * 1e16 - 5.0 * config.pulse.width * 1e16

    assert switch_on == pytest.approx(5.0 / gamma, rel=1e-9)

def test_default_config_is_valid():
    config = build_config(resolve_values({}))

    assert config.pulse.amplitude is None
    assert config.zpf.n_modes == 500
    assert config.time_step == pytest.approx(0.025 * 2.0 * math.pi)

def test_zpf_at_origin_flag():
    with pytest.raises(InvalidParameterError):
        build_config(resolve_values({'zpf_at_origin': 2}))

    assert build_config(resolve_values({'zpf_at_origin': 1})).zpf_at_origin

def test_formatted_values_read_back_identically():
    values = resolve_values({'pulse_theta_rad': 0.3, 'n_modes': 123})
    text = '\n'.join(format_values(values)) + '\n'

    assert read_values(io.StringIO(text)) == values

def test_overrides_replace_file_entries():
    values = read_values(io.StringIO('n_modes = 10\n'), {'n_modes': 30})
    assert values['n_modes'] == 30

def test_load_without_file_uses_defaults():
    assert load_values(None) == resolve_values({})

def test_load_values_from_file(tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_text('ensemble_size = 8\n')

    assert load_values(str(path))['ensemble_size'] == 8
