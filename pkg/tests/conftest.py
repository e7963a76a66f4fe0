import numpy as np
import pytest

from jellium import circle, fubini_study, pareto_tail, power_origin, uniform_disk


@pytest.fixture(scope="session")
def builtins():
    return {
        "circle": circle(1.0),
        "uniform_disk": uniform_disk(1.0),
        "fubini_study": fubini_study(),
        "pareto_tail": pareto_tail(1.5, 2.0),
        "power_origin": power_origin(3.0, 0.5),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
