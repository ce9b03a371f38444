import logging

from collections import (
    deque,
)

from typing import (
    Deque,
    Optional,
    TextIO,
)

from config_dfa import (
    DFA,
    FINAL_STATES,
    IDENTIFIER_STATES,
    NUMBER_STATES,
    SKIP_STATES,
)

logger = logging.getLogger(__name__)

class ConfigLexError(Exception):
    """
    Exception class for errors encountered while lexing a config file

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
        self.message = "Unable to lex config: "

    def __str__(self) -> str:

        return f'{self.message} {self.expression} at line {self.line}.'

class Token:
    """
    Token class for lexemes derived from a config file

    ...

    Attributes
    ----------
    token_name: str
    value: str
    start_index: int
    start_line: int

    """

    token_name: str
    value: str
    start_index: int
    start_line: int

    def __init__(
        self,
        token_name: str,
        value: str,
        start_index: int,
        start_line: int
    ) -> None:
        self.token_name = token_name
        self.value = value
        self.start_index = start_index
        self.start_line = start_line

    def __str__(self) -> str:

        return str(
            (
                self.token_name,
                self.value,
                self.start_line,
                self.start_index
            )
        )

class ConfigLexer:
    """
    Lexer instance to read a key-value config file and convert it into tokens

    ...

    Attributes
    ----------
    token_queue : Deque[Token]
    debug: bool

    Methods
    -------
    _get_current_char_class(char)
        Returns the DFA classification of the current character
    _get_next_state(current_state, new_char)
        Returns the next DFA state for the character, or None
    _tokenise_lexeme(lexeme, lexeme_state, lexeme_start_index, lexeme_start_line)
        Tokenises a lexeme that ended in a final state
    lex_content(f)
        Lexes the input file
    get_next_token_from_queue()
        Removes the token at the start of the queue and returns it
    peek()
        Retrieve the token at the start of the queue without removing
    """

    token_queue: Deque[Token]
    debug: bool

    def __init__(self, debug: bool=False) -> None:
        self.token_queue = deque()
        self.debug = debug

    def _get_current_char_class(self, char: str) -> str:
        """
        Helper function to classify a character for the DFA

        :param str char: the character to read
        :return: the DFA transition key of the character
        """
        if char in 'eE':
            return 'eE'

        if char.isalpha() or char == '_':
            return 'letter'

        elif char in '0123456789':
            return '0-9'

        elif char in '.=#':
            return char

        elif char in '+-':
            return '+-'

        elif char == '\n':
            return 'newline'

        elif char in ' \t\r':
            return 'space'

        return 'other'

    def _get_next_state(
        self,
        current_state: str,
        new_char: str
    ) -> Optional[str]:
        """
        Helper function to determine the next DFA state from the current state

        :param str current_state: the current state in the DFA
        :param str new_char: the character to read
        :return: the next state, or None if the transition does not exist
        """
        new_char_class = self._get_current_char_class(new_char)

        return DFA[current_state].get(new_char_class)

    def _tokenise_lexeme(
        self,
        lexeme: str,
        lexeme_state: str,
        lexeme_start_index: int,
        lexeme_start_line: int
    ) -> Optional[Token]:
        """
        Helper function to tokenise a lexeme

        :param str lexeme: the current lexeme
        :param str lexeme_state: the DFA state the lexeme ended in
        :param int lexeme_start_index: the start index of the lexeme
        :param int lexeme_start_line: the start line of the lexeme
        :return: a Token instance, or None for skipped lexemes
        :raises ConfigLexError: the lexeme ended in a non-final state
        """
        if lexeme_state in SKIP_STATES or lexeme_state == '0':
            return None

        if lexeme_state not in FINAL_STATES:
            raise ConfigLexError(
                f"Malformed number '{lexeme}' at index {lexeme_start_index}",
                lexeme_start_line
            )

        if lexeme_state in IDENTIFIER_STATES:
            token_name = 'IDENTIFIER'

        elif lexeme_state in NUMBER_STATES:
            token_name = 'NUMBER'

        elif lexeme_state == '10':
            token_name = 'EQUALS'

        else:
            token_name = 'NEWLINE'

        return Token(
            token_name,
            lexeme,
            lexeme_start_index,
            lexeme_start_line
        )

    def lex_content(self, f: TextIO) -> None:
        """
        Lexes the input file

        :param TextIO f: the input file
        :raises ConfigLexError: a character or lexeme is not valid
        """
        completed = False

        index = 1
        line = 1

        current_lexeme = ''
        current_lexeme_state = '0'
        current_lexeme_start_index = 1
        current_lexeme_start_line = 1

        while not completed:

            current_char = f.read(1)

            if not current_char:
                token = self._tokenise_lexeme(
                    current_lexeme,
                    current_lexeme_state,
                    current_lexeme_start_index,
                    current_lexeme_start_line
                )

                if token:
                    self.token_queue.append(token)

                # A missing final newline still terminates the last entry
                self.token_queue.append(Token('NEWLINE', '\n', index, line))
                self.token_queue.append(Token('EOF', '', index, line))

                completed = True
                break

            new_lexeme_state = self._get_next_state(
                current_lexeme_state,
                current_char
            )

            if new_lexeme_state:
                current_lexeme += current_char
                current_lexeme_state = new_lexeme_state

            else:
                token = self._tokenise_lexeme(
                    current_lexeme,
                    current_lexeme_state,
                    current_lexeme_start_index,
                    current_lexeme_start_line
                )

                if token:
                    self.token_queue.append(token)

                    if self.debug:
                        logger.debug("Token added: %s", token)

                current_lexeme = current_char
                current_lexeme_start_index = index
                current_lexeme_start_line = line
                start_state = self._get_next_state('0', current_char)

                if not start_state:
                    raise ConfigLexError(
                        f"Unexpected character {current_char!r} at index {index}",
                        line
                    )

                current_lexeme_state = start_state

            if current_char == '\n':
                index = 1
                line += 1
            else:
                index += 1

    def get_next_token_from_queue(self) -> Token:
        """
        Pops the next token from the queue

        :return: the token on the left of the queue
        """
        return self.token_queue.popleft()

    def peek(self) -> Token:
        """
        Reads the next token without popping

        :return: the token on the left of the queue
        """
        return self.token_queue[0]
