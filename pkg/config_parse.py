import logging
import math
import sys

from collections import (
    OrderedDict,
)

from typing import (
    Dict,
    List,
    Optional,
    TextIO,
    Union,
)

from config_lex import (
    ConfigLexer,
    Token,
)

from constants import (
    REDUCED_MASS,
    InvalidParameterError,
)

from oscillator import (
    OscillatorParams,
    SimulationConfig,
    relaxation_time,
)

from pulse import (
    PULSE_HALF_SPAN,
    PulseParams,
)

from zpf import (
    ZpfParams,
)

logger = logging.getLogger(__name__)

ConfigValue = Union[float, int, str]

ConfigValues = Dict[str, ConfigValue]

AUTO = 'auto'

FLOAT_KEYS: List[str] = [
    'mass_kg',
    'charge_C',
    'omega0_rad_s',
    'pulse_omega_over_omega0',
    'pulse_theta_rad',
    'pulse_dt_periods',
    'zpf_bandwidth_over_gamma_w0sq',
    'dt_periods',
    'total_time_periods',
    'measure_from_periods',
    'measure_to_periods',
    'pulse_center_periods',
    'qm_dt_periods',
]

INTEGER_KEYS: List[str] = [
    'n_modes',
    'ensemble_size',
    'master_seed',
    'qm_levels',
    'expansion_order',
    'zpf_at_origin',
]

# Keys in the order they are echoed into output headers
CONFIG_KEYS: List[str] = [
    'mass_kg',
    'charge_C',
    'omega0_rad_s',
    'pulse_amplitude',
    'pulse_omega_over_omega0',
    'pulse_theta_rad',
    'pulse_dt_periods',
    'zpf_bandwidth_over_gamma_w0sq',
    'n_modes',
    'ensemble_size',
    'dt_periods',
    'total_time_periods',
    'measure_from_periods',
    'measure_to_periods',
    'master_seed',
    'qm_levels',
    'expansion_order',
    'pulse_center_periods',
    'qm_dt_periods',
    'zpf_at_origin',
]

DEFAULTS: ConfigValues = {
    'mass_kg': REDUCED_MASS,
    'charge_C': 1.60e-19,
    'omega0_rad_s': 1e16,
    'pulse_amplitude': AUTO,
    'pulse_omega_over_omega0': 1.0,
    'pulse_theta_rad': math.pi / 4,
    'pulse_dt_periods': 20.0,
    'zpf_bandwidth_over_gamma_w0sq': 220.0,
    'n_modes': 500,
    'ensemble_size': 100,
    'dt_periods': 0.025,
    'master_seed': 20130101,
    'qm_levels': 20,
    'expansion_order': 20,
    'zpf_at_origin': 0,
}

class ConfigError(Exception):
    """
    Exception class for config files that lex but do not describe a valid run

    ...

    Attributes
    ----------
    expression: str
    line: int
    message: str

    """

    expression: str
    line: int
    message: str

    def __init__(self, expression: str, line: int) -> None:
        self.expression = expression
        self.line = line
        self.message = "Invalid config entry: "

    def __str__(self) -> str:

        return f'{self.message} {self.expression} at line {self.line}.'

class ConfigParser:
    """
    Parser instance reading `key = value` entries from a ConfigLexer

    ...

    Attributes
    ----------
    lex : ConfigLexer
    values : ConfigValues
    lines : Dict[str, int]
    debug: bool

    Methods
    -------
    _eat(expected_token)
        Consumes the next token if it matches, raising ConfigError otherwise
    _convert(key, token)
        Converts a value token into the type the key expects
    _entry_expression()
        Parses one line of the file
    parse(f)
        Lexes and parses the whole file
    """

    lex: ConfigLexer
    values: ConfigValues
    lines: Dict[str, int]
    debug: bool

    def __init__(self, debug: bool=False) -> None:
        self.lex = ConfigLexer(debug)
        self.values = OrderedDict()
        self.lines = {}
        self.debug = debug

    def _eat(self, expected_token: str) -> Token:
        """
        Checks that the next token is of the expected kind and consumes it

        :param str expected_token: the expected token name
        :return: the consumed token
        :raises ConfigError: the next token does not match
        """
        next_token = self.lex.peek()

        if next_token.token_name != expected_token:
            raise ConfigError(
                f"expected {expected_token} but found {next_token.token_name} {next_token.value!r}",
                next_token.start_line
            )

        if self.debug:
            logger.debug("Token eaten: %s", next_token)

        return self.lex.get_next_token_from_queue()

    def _convert(self, key: str, token: Token) -> ConfigValue:
        """
        Converts a value token for the given key

        :param str key: the config key
        :param Token token: the value token
        :return: the typed value
        :raises ConfigError: the value is malformed for the key
        """
        if key == 'pulse_amplitude':

            if token.token_name == 'IDENTIFIER' and token.value == AUTO:
                return AUTO

            if token.token_name == 'NUMBER':
                return float(token.value)

        elif token.token_name == 'NUMBER' and key in FLOAT_KEYS:
            return float(token.value)

        elif token.token_name == 'NUMBER' and key in INTEGER_KEYS:

            try:
                return int(token.value)
            except ValueError:
                pass

        raise ConfigError(
            f"malformed value {token.value!r} for key '{key}'",
            token.start_line
        )

    def _entry_expression(self) -> None:
        """
        <Entry> -> NEWLINE | IDENTIFIER EQUALS <Value> NEWLINE
        """
        if self.lex.peek().token_name == 'NEWLINE':
            self._eat('NEWLINE')
            return

        key_token = self._eat('IDENTIFIER')
        key = key_token.value

        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key '{key}'", key_token.start_line)

        if key in self.values:
            raise ConfigError(
                f"duplicate key '{key}', first set at line {self.lines[key]}",
                key_token.start_line
            )

        self._eat('EQUALS')

        value_token = self.lex.peek()

        if value_token.token_name not in ('NUMBER', 'IDENTIFIER'):
            raise ConfigError(
                f"missing value for key '{key}'",
                value_token.start_line
            )

        self.values[key] = self._convert(key, self.lex.get_next_token_from_queue())
        self.lines[key] = key_token.start_line

        self._eat('NEWLINE')

    def parse(self, f: TextIO) -> ConfigValues:
        """
        Lexes the input file into tokens, then parses every entry

        :param TextIO f: the config file
        :return: the explicitly set values, in file order
        """
        self.lex.lex_content(f)

        while self.lex.peek().token_name != 'EOF':
            self._entry_expression()

        return self.values

def resolve_values(values: ConfigValues) -> ConfigValues:
    """
    Fills in defaults, including those derived from other keys

    Derived defaults are computed in config units so that echoing the
    resolved values and reading them back reproduces the run exactly.

    :param ConfigValues values: explicitly set values
    :return: a value for every key in CONFIG_KEYS
    """
    resolved: ConfigValues = OrderedDict()

    for key in CONFIG_KEYS:

        if key in values:
            resolved[key] = values[key]
        elif key in DEFAULTS:
            resolved[key] = DEFAULTS[key]

    pulse_dt = float(resolved['pulse_dt_periods'])

    if 'pulse_center_periods' not in resolved:
        gamma = OscillatorParams(
            float(resolved['mass_kg']),
            float(resolved['charge_C']),
            float(resolved['omega0_rad_s'])
        ).scaled_damping

        resolved['pulse_center_periods'] = (
            relaxation_time(gamma) / (2.0 * math.pi) + PULSE_HALF_SPAN * pulse_dt
        )

    if 'measure_from_periods' not in resolved:
        resolved['measure_from_periods'] = 4.0 * pulse_dt

    if 'measure_to_periods' not in resolved:
        resolved['measure_to_periods'] = float(resolved['measure_from_periods']) + 10.0

    if 'total_time_periods' not in resolved:
        resolved['total_time_periods'] = (
            float(resolved['pulse_center_periods']) + float(resolved['measure_to_periods'])
        )

    if 'qm_dt_periods' not in resolved:
        resolved['qm_dt_periods'] = float(resolved['dt_periods']) / 4.0

    return OrderedDict((key, resolved[key]) for key in CONFIG_KEYS)

def build_config(values: ConfigValues) -> SimulationConfig:
    """
    Builds a validated SimulationConfig from resolved config values

    :param ConfigValues values: output of resolve_values
    :return: the simulation config
    :raises InvalidParameterError: a value lies outside its physical domain
    """
    two_pi = 2.0 * math.pi

    oscillator = OscillatorParams(
        mass=float(values['mass_kg']),
        charge=float(values['charge_C']),
        natural_frequency=float(values['omega0_rad_s']),
    )
    omega0 = oscillator.natural_frequency
    period = two_pi / omega0

    amplitude = values['pulse_amplitude']

    pulse = PulseParams(
        amplitude=None if amplitude == AUTO else float(amplitude),
        carrier_frequency=float(values['pulse_omega_over_omega0']) * omega0,
        angle=float(values['pulse_theta_rad']),
        width=float(values['pulse_dt_periods']) * period,
        center=float(values['pulse_center_periods']) * period,
    )

    bandwidth = (
        float(values['zpf_bandwidth_over_gamma_w0sq'])
        * oscillator.damping * omega0 * omega0
    )

    zpf = ZpfParams(
        n_modes=int(values['n_modes']),
        bandwidth=bandwidth,
        center=omega0,
    )

    zpf_at_origin = int(values['zpf_at_origin'])
    if zpf_at_origin not in (0, 1):
        raise InvalidParameterError(f"zpf_at_origin must be 0 or 1, got {zpf_at_origin}")

    return SimulationConfig(
        oscillator=oscillator,
        pulse=pulse,
        zpf=zpf,
        ensemble_size=int(values['ensemble_size']),
        time_step=float(values['dt_periods']) * two_pi,
        total_time=float(values['total_time_periods']) * two_pi,
        measurement_window=(
            float(values['measure_from_periods']) * two_pi,
            float(values['measure_to_periods']) * two_pi,
        ),
        master_seed=int(values['master_seed']),
        qm_levels=int(values['qm_levels']),
        expansion_order=int(values['expansion_order']),
        qm_time_step=float(values['qm_dt_periods']) * two_pi,
        zpf_at_origin=bool(zpf_at_origin),
    )

def format_values(values: ConfigValues) -> List[str]:
    """
    Formats resolved values as config lines, floats in shortest round-trip form

    :param ConfigValues values: resolved config values
    :return: `key = value` lines in CONFIG_KEYS order
    """
    lines = []

    for key in CONFIG_KEYS:

        if key not in values:
            continue

        value = values[key]
        lines.append(f'{key} = {value}' if isinstance(value, str) else f'{key} = {value!r}')

    return lines

def read_values(
    f: TextIO,
    overrides: Optional[ConfigValues]=None,
    debug: bool=False
) -> ConfigValues:
    """
    Parses a config file and resolves its defaults

    :param TextIO f: the config file
    :param Optional[ConfigValues] overrides: values that replace the file's entries
    :param bool debug: log every token
    :return: resolved config values
    """
    parser = ConfigParser(debug)
    values = OrderedDict(parser.parse(f))

    if overrides:
        values.update(overrides)

    return resolve_values(values)

def load_config(
    path: Optional[str],
    overrides: Optional[ConfigValues]=None,
    debug: bool=False
) -> SimulationConfig:
    """
    Loads a config file into a validated SimulationConfig

    :param Optional[str] path: config file path; None means all defaults
    :param Optional[ConfigValues] overrides: values that replace the file's entries
    :param bool debug: log every token
    :return: the simulation config
    """
    return build_config(load_values(path, overrides, debug))

def load_values(
    path: Optional[str],
    overrides: Optional[ConfigValues]=None,
    debug: bool=False
) -> ConfigValues:

    if path is None:
        values: ConfigValues = OrderedDict(overrides or {})
        return resolve_values(values)

    with open(path, 'r') as f:
        return read_values(f, overrides, debug)

def __main__():

    if len(sys.argv) < 2:
        sys.stdout.write("Usage: python config_parse.py [FILE_NAME]\n")
        return

    values = load_values(sys.argv[1], debug=True)
    build_config(values)

    for line in format_values(values):
        sys.stdout.write(line + '\n')


if __name__ == "__main__":

    __main__()
