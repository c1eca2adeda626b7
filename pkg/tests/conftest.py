import numpy as np
import pytest

from phmeasure import fixtures

FIXTURE_NAMES = ["eq5.A", "eq5.B", "eq6.A", "eq6.B"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def eta_pos():
    return fixtures.metric("eta_pos")


@pytest.fixture
def eta_indef():
    return fixtures.metric("eta_indef")


@pytest.fixture(params=FIXTURE_NAMES)
def fixture_observable(request):
    return request.param, fixtures.observable(request.param)


def faddeev_leverrier(A):
    """Characteristic polynomial coefficients of ``det(lambda - A)``, highest first.

    Uses only matrix products and traces, so it is independent of any
    eigensolver.
    """
    n = A.shape[0]
    coeffs = [1.0 + 0j]
    M = np.zeros_like(A)
    I = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * I
        coeffs.append(-np.trace(A @ M) / k)
    return np.array(coeffs)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] criterion {number:2d}: {title}"
    if detail:
        line += f"  ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
