from typing import (
    Any,
    Dict,
    List,
)

DFA: Dict[str, Any] = {
    '0': {
    # Start state
        'letter': '1',
        'eE': '1',
        '0-9': '2',
        '.': '3',
        '+-': '4',
        '=': '10',
        '#': '11',
        'newline': '12',
        'space': '13',
    },
    '1': {
    # Identifier state (keys and the word auto)
        'letter': '1',
        'eE': '1',
        '0-9': '1',
    },
    '2': {
    # Integer part of a number
        '0-9': '2',
        '.': '5',
        'eE': '6',
    },
    '3': {
    # Leading decimal point, a digit must follow
        '0-9': '5',
    },
    '4': {
    # Sign of a number
        '0-9': '2',
        '.': '3',
    },
    '5': {
    # Fractional part of a number
        '0-9': '5',
        'eE': '6',
    },
    '6': {
    # Exponent marker
        '+-': '7',
        '0-9': '8',
    },
    '7': {
    # Exponent sign
        '0-9': '8',
    },
    '8': {
    # Exponent digits
        '0-9': '8',
    },
    '10': {
    # Assignment operator
    },
    '11': {
    # Comment runs to the end of the line
        'letter': '11',
        'eE': '11',
        '0-9': '11',
        '.': '11',
        '+-': '11',
        '=': '11',
        '#': '11',
        'space': '11',
        'other': '11',
    },
    '12': {
    # Newline
    },
    '13': {
    # Whitespace
        'space': '13',
    },
}

IDENTIFIER_STATES: List[str] = ['1']

NUMBER_STATES: List[str] = ['2', '5', '8']

FINAL_STATES: List[str] = ['1', '2', '5', '8', '10', '12']

# States that are consumed without producing a token
SKIP_STATES: List[str] = ['11', '13']
