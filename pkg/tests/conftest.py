import json
import math
from functools import lru_cache
from pathlib import Path

import pytest

from bakerlab.baker_bv import BVOperator, spectral_decompose
from bakerlab.selberg import AngleInterval
from bakerlab.spectral import window_basis

ORACLE_PATH = Path(__file__).with_name("oracle_values.json")


@lru_cache(maxsize=None)
def decomposition(N):
    """Spectral data shared by every test module in the session."""
    return spectral_decompose(BVOperator(N))


@lru_cache(maxsize=None)
def basis(N, start, length):
    """Orthonormal basis of the range of P_I, I = [start, start + length)."""
    return window_basis(BVOperator(N), AngleInterval(start, length))


@lru_cache(maxsize=1)
def oracle_values():
    return json.loads(ORACLE_PATH.read_text())


@pytest.fixture(scope="session")
def oracles():
    return oracle_values()


_REPORT_LINES = []


def report(name, ok, detail=""):
    """Record one pass/fail line; all lines are repeated in the terminal summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
    print(line)
    _REPORT_LINES.append(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if _REPORT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT_LINES:
            terminalreporter.write_line(line)


def brute_excluded(x, y, p):
    """Direct transcription of the membership rules for A with Python scalars."""
    N = p.N
    step = 2.0 ** (-p.J)
    dist = min(abs(y / N - k * step) for k in range(-1, int(round(1 / step)) + 2))
    if dist <= p.delta or x / N <= p.gamma or x / N >= 1 - p.gamma:
        return True
    for k in range(1, math.ceil(p.J - 1e-12) + 1):
        d = (x - (2 ** k) * y) % N
        if min(d, N - d) <= p.W:
            return True
    return False
