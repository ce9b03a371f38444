from typing import (
    Dict,
)

# CODATA 2018 recommended values, SI units.
HBAR: float = 1.054571817e-34           # J s
SPEED_OF_LIGHT: float = 299792458.0     # m / s
VACUUM_PERMITTIVITY: float = 8.8541878128e-12   # F / m

ELECTRON_MASS: float = 9.1093837015e-31     # kg
ELEMENTARY_CHARGE: float = 1.602176634e-19  # C

# Reduced mass that keeps the radiation damping time manageable
REDUCED_MASS: float = 9.11e-35

CONSTANTS_SOURCE = 'CODATA 2018'

GENERATOR_ALGORITHM = 'numpy Philox4x64-10 keyed by SeedSequence(master_seed, spawn_key=(trajectory,))'

VERSION = '1.0.0'

def constants_echo() -> Dict[str, str]:
    """
    Returns the compiled constants as strings for output file headers

    :return: mapping of constant name to its shortest round-trip repr
    """
    return {
        'constants_source': CONSTANTS_SOURCE,
        'hbar_J_s': repr(HBAR),
        'c_m_s': repr(SPEED_OF_LIGHT),
        'epsilon0_F_m': repr(VACUUM_PERMITTIVITY),
        'generator': GENERATOR_ALGORITHM,
        'version': VERSION,
    }

class InvalidParameterError(Exception):
    """
    Exception class for physical or numerical parameters outside their domain

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
        self.message = "Invalid parameter: "

    def __str__(self) -> str:

        return f'{self.message} {self.expression}'
