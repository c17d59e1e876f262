import pytest
from hypothesis import HealthCheck, settings

from gpm.props import load_demo

settings.register_profile(
    "gpm", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow]
)
settings.load_profile("gpm")

_ACCEPTANCE: list[str] = []


def record(line: str) -> None:
    _ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def demo():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_demo(name)
        return cache[name]

    return get
