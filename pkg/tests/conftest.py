from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qrlbp.codes import steane_code, toric_code
from qrlbp.gf2 import BitMatrix
from qrlbp.graph import build_adjacency

settings.register_profile(
    "repo", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def steane():
    return steane_code()


@pytest.fixture(scope="session")
def toric3():
    return toric_code(3)


@pytest.fixture(scope="session")
def steane_adj(steane):
    return build_adjacency(steane.h_a)


@pytest.fixture(scope="session")
def toric3_adjs(toric3):
    return build_adjacency(toric3.h_a), build_adjacency(toric3.h_b)


def random_matrix(rng: np.random.Generator, m: int, n: int, density: float = 0.4) -> BitMatrix:
    return BitMatrix.from_array(rng.random((m, n)) < density)


_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def verdict(request, capsys):
    """Record and print one pass/fail line for an acceptance criterion, then assert it."""
    lines = request.config.stash[_VERDICTS]

    def report(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")
        lines.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
