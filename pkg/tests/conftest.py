import warnings
from pathlib import Path

import pytest

from emtrloc import emtr, netmodel as nm, solver

ROOT = Path(__file__).resolve().parents[1]
NETWORKS = ROOT / "networks"

DT = 1e-7
WINDOW = 5e-3
FAULT_1 = nm.FaultSpec("T1", 4000.0, 1.0)
FAULT_2 = nm.FaultSpec("T3", 1000.0, 1.0)


def _simulate(net, fault):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", solver.TransientWarning)
        return solver.simulate_fault_transient(net, fault, DT, WINDOW)


@pytest.fixture(scope="session")
def single_net():
    return nm.load_network(NETWORKS / "single_line.net")


@pytest.fixture(scope="session")
def single_u0(single_net):
    return _simulate(single_net, nm.FaultSpec("L1", 8000.0))


@pytest.fixture(scope="session")
def t_net():
    return nm.load_network(NETWORKS / "t_network.net")


@pytest.fixture(scope="session")
def t_grid(t_net):
    return nm.make_guess_grid(t_net, 500.0)


@pytest.fixture(scope="session")
def t_u0(t_net):
    return {FAULT_1.position: _simulate(t_net, FAULT_1), FAULT_2.position: _simulate(t_net, FAULT_2)}


@pytest.fixture(scope="session")
def t_db_impulse(t_net, t_grid):
    u, desc = emtr.excitation("impulse", int(round(WINDOW / DT)), DT)
    return emtr.precompute_db(t_net, t_grid, u, descriptor=desc)


_REPORT = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_REPORT] = []


@pytest.fixture
def report(request):
    """Record one pass/fail line for the acceptance summary."""
    lines = request.config.stash[_REPORT]

    def _record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((n, line))
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_REPORT, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
