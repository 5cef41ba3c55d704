from pathlib import Path

import pytest

from vetocore.axioms import CONDORCET, CONSISTENCY, OBVIOUS_TIE, PARETO, RESOLVABILITY
from vetocore.election import parse_election

BALLOTS = Path(__file__).resolve().parents[1] / 'ballots'

CONVEXITY = (BALLOTS / 'convexity.ballots').read_text(encoding='utf-8')


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow property sweeps")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def ballot_dir() -> Path:
    return BALLOTS


@pytest.fixture
def obvious_tie():
    return parse_election(OBVIOUS_TIE)


@pytest.fixture
def zero_plurality():
    return parse_election(RESOLVABILITY)


@pytest.fixture
def convexity():
    return parse_election(CONVEXITY)


@pytest.fixture
def consistency():
    return parse_election(CONSISTENCY)


@pytest.fixture
def pareto():
    return parse_election(PARETO)


@pytest.fixture
def condorcet():
    return parse_election(CONDORCET)


