import numpy as np
import pytest

from nonlocal_burgers.field import grid_with_spacing, sample_initial, tanh_ramp
from nonlocal_burgers.kernels import discretize_kernel, exponential
from nonlocal_burgers.nonlocal_operator import NonlocalOp
from nonlocal_burgers.references import RiemannData
from nonlocal_burgers.solver import SolverConfig, integrate

STANDARD = RiemannData(-1.0, 1.0)
RATE_TIMES = (1, 5, 10, 12.5, 16, 20, 25, 32, 40, 50, 63, 80, 100, 125, 160, 200,
              250, 320, 400, 500, 630, 800, 1000)

_ACCEPTANCE_LINES = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def fan_grid(t_end, h, r=STANDARD, diffusivity=1.0):
    margin = 20.0 + 10.0 * np.sqrt(max(1.0, diffusivity) * t_end)
    return grid_with_spacing(min(r.u_minus * t_end, 0.0) - margin,
                             max(r.u_plus * t_end, 0.0) + margin, h)


def standard_setup(t_end, h, width=1.0):
    grid = fan_grid(t_end, h)
    op = NonlocalOp(discretize_kernel(exponential(1.0), h), grid)
    state0 = sample_initial(grid, tanh_ramp(STANDARD, width))
    return grid, op, state0


@pytest.fixture(scope="session")
def short_run():
    """(-1, 1), tanh width 1, exponential kernel, eps=0, h=0.05, t_end=100."""
    _, op, state0 = standard_setup(100.0, 0.05)
    cfg = SolverConfig(0.0, 0.4, 1e-12, 100.0, (1, 5, 10, 20, 50, 100))
    return integrate(state0, op, cfg)


@pytest.fixture(scope="session")
def short_partner(short_run):
    """Same grid and kernel as ``short_run`` with a tanh width of 2."""
    grid = short_run.initial.grid
    op = NonlocalOp(discretize_kernel(exponential(1.0), grid.h), grid)
    state0 = sample_initial(grid, tanh_ramp(STANDARD, 2.0))
    return integrate(state0, op, short_run.config)


@pytest.fixture(scope="session")
def long_run():
    """h=0.1 run to t=1000 with log-spaced snapshots."""
    _, op, state0 = standard_setup(1000.0, 0.1)
    cfg = SolverConfig(0.0, 0.4, 1e-12, 1000.0, RATE_TIMES)
    return integrate(state0, op, cfg)
