"""Shared fixtures and the acceptance-criteria summary hook."""

import numpy as np
import pytest

import radaukron as rk

# Registry filled by tests/test_acceptance.py; printed as one line per
# criterion in the terminal summary regardless of output capturing.
_ACCEPTANCE_RESULTS = {}


def record_criterion(num, title, passed, detail=""):
    _ACCEPTANCE_RESULTS[num] = (str(title), bool(passed), str(detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE_RESULTS):
        title, ok, detail = _ACCEPTANCE_RESULTS[num]
        word = "PASS" if ok else "FAIL"
        line = f"CRITERION {num:2d}: {word} - {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fact2():
    return rk.factorize(2)


@pytest.fixture(scope="session")
def fact3():
    return rk.factorize(3)


@pytest.fixture(scope="session")
def grid5_dirichlet():
    return rk.assemble_q1(5, bc_mode="dirichlet_interior")


@pytest.fixture(scope="session")
def grid7_dirichlet():
    return rk.assemble_q1(7, bc_mode="dirichlet_interior")


@pytest.fixture(scope="session")
def grid5_full():
    return rk.assemble_q1(5, bc_mode="full")
