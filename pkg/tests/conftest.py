import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scholedger.fixture import build_fixture, fixture_config  # noqa: E402


@pytest.fixture(scope="session")
def fixture_ledger():
    return build_fixture()


@pytest.fixture
def config():
    return fixture_config()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
