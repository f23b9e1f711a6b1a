import pytest

from blaschke.circle import find_superattracting_alpha
from blaschke.mapcore import MapParams


@pytest.fixture(scope="session")
def alpha_star():
    """Superattracting 1/2 parameter on the r = 2 line for d = 2."""
    return find_superattracting_alpha(2, 2.0, 1, 2)


@pytest.fixture(scope="session")
def params_star(alpha_star):
    return MapParams.from_polar(2, 2.0, alpha_star)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
