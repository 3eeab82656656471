"""Shared fixtures: parsed logistics models and ground tasks."""

from pathlib import Path

import pytest

from planwhy import grounding, parser, planner

FIXTURES = Path(__file__).parent / "fixtures"


def read(name: str) -> str:
    return (FIXTURES / name).read_text()


def load_plan(name: str):
    return planner.parse_plan(read(name))


@pytest.fixture(scope="session")
def logistics_domain():
    return parser.parse_domain(read("driverlog-domain.pddl"))


@pytest.fixture(scope="session")
def logistics_p1(logistics_domain):
    return parser.parse_problem(read("driverlog-p1.pddl"), logistics_domain)


@pytest.fixture(scope="session")
def logistics_p2(logistics_domain):
    return parser.parse_problem(read("driverlog-p2.pddl"), logistics_domain)


@pytest.fixture(scope="session")
def task_p1(logistics_domain, logistics_p1):
    return grounding.ground(logistics_domain, logistics_p1)


@pytest.fixture(scope="session")
def task_p2(logistics_domain, logistics_p2):
    return grounding.ground(logistics_domain, logistics_p2)


@pytest.fixture()
def builtin_config():
    return planner.PlannerConfig()


def pytest_terminal_summary(terminalreporter):
    """Print one line per acceptance criterion after the run."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
