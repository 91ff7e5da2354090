import pathlib

import pytest
from hypothesis import HealthCheck, settings

from deabias.config import calibrated_membrane, default_paper_scenario

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = pathlib.Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"
FIXTURES = ROOT / "data" / "reconstructed"


@pytest.fixture(scope="session")
def membrane():
    return calibrated_membrane()


@pytest.fixture(scope="session")
def mass_scenario():
    return default_paper_scenario("mass:27.1", calibrated=True)


@pytest.fixture(scope="session")
def mre15_scenario():
    return default_paper_scenario("MRE15", offset=14e-3, calibrated=True)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = {}


def record_acceptance(number, title, passed, detail):
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
