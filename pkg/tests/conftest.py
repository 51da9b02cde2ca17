from contextlib import contextmanager

import numpy as np
import pytest

from lrsync.protocol import make_protocol
from lrsync.regulator import AgentDynamics

EXAMPLE_A = [[-2.21, 2.40], [0.43, -0.44]]
EXAMPLE_B = [[0.27], [0.0]]
EXAMPLE_E = [[0.06, 0.6]]


@pytest.fixture
def example_dyn():
    return AgentDynamics(EXAMPLE_A, EXAMPLE_B, EXAMPLE_E, [1.0, 1.0])


@pytest.fixture
def example_cfg(example_dyn):
    return make_protocol(example_dyn, beta=1.0, gamma=13.0, rho=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []


@contextmanager
def _criterion(number, title):
    try:
        yield
    except BaseException as exc:
        detail = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
        ACCEPTANCE.append((number, title, False, detail))
        raise
    ACCEPTANCE.append((number, title, True, ""))


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line for an acceptance criterion."""
    return _criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    def order(row):
        label = str(row[0])
        digits = "".join(ch for ch in label if ch.isdigit())
        return int(digits), label

    for number, title, ok, detail in sorted(ACCEPTANCE, key=order):
        line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
