import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from forcematch.model import parse_instance, parse_matching

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", max_examples=150, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_addoption(parser):
    parser.addoption("--exhaustive-n4", action="store_true", default=False,
                     help="also run the 4x4 exhaustive profile search (tens of minutes)")


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def tight3():
    inst = parse_instance((FIXTURES / "tight_n3.inst").read_text())
    mu = parse_matching((FIXTURES / "tight_n3.match").read_text(), 3, 3)
    return inst, mu


@pytest.fixture
def two_stable():
    return parse_instance((FIXTURES / "two_stable.inst").read_text())
