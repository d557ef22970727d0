import pytest

from rfhom.decomposition import BOUNDS_LOOSE, BOUNDS_TIGHT, DEFAULT_GRID, fit_single_photon

ACCEPTANCE = []


@pytest.fixture(scope="session")
def fit_loose():
    return fit_single_photon(DEFAULT_GRID, BOUNDS_LOOSE)


@pytest.fixture(scope="session")
def fit_tight():
    return fit_single_photon(DEFAULT_GRID, BOUNDS_TIGHT)


@pytest.fixture
def report():
    """Record a one-line acceptance verdict; printed in the terminal summary."""
    def _report(name, ok, detail):
        ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
