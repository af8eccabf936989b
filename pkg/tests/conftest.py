import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from jumpwheel import ControllerConfig, RobotParams, SimConfig, builtin_profiles, run_scenario  # noqa: E402


@pytest.fixture(scope="session")
def params():
    return RobotParams()


@pytest.fixture(scope="session")
def vertical_record(params):
    return run_scenario(params, SimConfig(), builtin_profiles()["vertical"], ControllerConfig())


@pytest.fixture(scope="session")
def horizontal_record(params):
    return run_scenario(params, SimConfig(), builtin_profiles()["horizontal"], ControllerConfig())


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
