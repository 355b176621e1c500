import numpy as np
import pytest

from fracchoquard import SolverOptions, make_grid, solve_petviashvili, validate_params


def gaussian(grid, width=1.0, centre=None):
    centre = centre if centre is not None else [0.0] * grid.dim
    r2 = sum((c - c0) ** 2 for c, c0 in zip(grid.coords(), centre))
    return np.exp(-0.5 * r2 / width**2)


@pytest.fixture(scope="session")
def params_1d():
    return validate_params(1, 0.4, 0.5, 2.0, 1.0)


@pytest.fixture(scope="session")
def ground_1d(params_1d):
    """Converged 1D ground state, N=1, s=0.4, alpha=0.5, p=2, omega=1."""
    grid = make_grid(1, 1024, 40.0)
    report = solve_petviashvili(params_1d, 1.0, grid, SolverOptions(tol=1e-11))
    assert report.converged
    return report


@pytest.fixture(scope="session")
def ground_2d():
    params = validate_params(2, 0.6, 1.0, 2.0, 1.0)
    grid = make_grid(2, 128, 16.0)
    report = solve_petviashvili(params, 1.0, grid, SolverOptions(tol=1e-10))
    assert report.converged
    return report


# -- acceptance reporting: one PASS/FAIL line per criterion --------------------------

_LINES_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = {}


@pytest.fixture
def record(request):
    """``record(number, clauses, expected_fail=())`` with clauses as
    ``(name, ok, detail)``; writes the criterion line and returns the failing
    clause names that are not listed in ``expected_fail``."""
    config = request.config

    def _record(number, clauses, expected_fail=()):
        failed = [c for c in clauses if not c[1]]
        status = "PASS" if not failed else "FAIL"
        text = "; ".join(f"{name}: {detail}" + ("" if ok else " [fail]") for name, ok, detail in clauses)
        if failed and all(c[0] in expected_fail for c in failed):
            text += " (expected failure, see notes)"
        line = f"acceptance criterion {number:2d}: {status}  {text}"
        config.stash[_LINES_KEY][number] = line
        reporter = config.pluginmanager.get_plugin("terminalreporter")
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        return [c[0] for c in failed if c[0] not in expected_fail]

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])
