import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from superradar.config import RadarConfig, reference_config  # noqa: E402

from oracles import small_config_params  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture(scope="session")
def ref_config():
    return reference_config()


@pytest.fixture(scope="session")
def small_params():
    return small_config_params()


@pytest.fixture(scope="session")
def small_config(small_params):
    return RadarConfig(**small_params)


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
