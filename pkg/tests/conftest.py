import numpy as np
import pytest

from indistent.experiments import random_setup
from indistent.permutation import Statistics

_acceptance_lines = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion; reported in the summary")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    label = dict(report.user_properties).get("acceptance")
    if label is not None:
        status = "PASS" if report.passed else "FAIL"
        _acceptance_lines.append(f"[{status}] {label}")


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        item.user_properties.append(("acceptance", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_feasible_setup(rng, max_N=3, max_n=5):
    """Random (statistics, N, n) with a setup drawn by ``random_setup``."""
    stat = Statistics.BOSON if rng.random() < 0.5 else Statistics.FERMION
    N = int(rng.integers(1, max_N + 1))
    low = max(2, N) if stat is Statistics.FERMION else 2
    n = int(rng.integers(low, max_n + 1))
    return random_setup(N, n, rng, statistics=stat)
