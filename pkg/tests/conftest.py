import pytest

from helpers import (
    make_problem,
)

from oscillator import (
    ScaledProblem,
)

@pytest.fixture
def fast_problem() -> ScaledProblem:
    return make_problem()
