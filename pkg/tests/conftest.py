import math

import pytest

from parity_kicks import build_coupling_matrix, build_flat_bath
from parity_kicks.model import SystemParams

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def params():
    return SystemParams()


@pytest.fixture(scope="session")
def bath(params):
    return build_flat_bath(params, 0.01, 100)


@pytest.fixture(scope="session")
def M(bath):
    return build_coupling_matrix(bath)


@pytest.fixture(scope="session")
def small_bath():
    # 41 modes; cheap enough for property tests
    return build_flat_bath(SystemParams(gamma=0.05), 0.05, 20)


@pytest.fixture(scope="session")
def small_M(small_bath):
    return build_coupling_matrix(small_bath)


@pytest.fixture
def record_criterion():
    def record(name: str, passed: bool, detail: str) -> None:
        ACCEPTANCE_RESULTS.append((name, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")


SQRT5 = math.sqrt(5.0)
