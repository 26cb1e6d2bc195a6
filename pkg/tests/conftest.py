import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record one verdict line per acceptance criterion.

    Lines are printed immediately (visible with ``-s``) and repeated in the
    terminal summary so that ``pytest -v`` output always contains them.
    """
    lines = request.config.stash[_ACCEPTANCE]

    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        print(line)
        lines.append((number, line))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
