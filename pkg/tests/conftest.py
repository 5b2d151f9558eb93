import numpy as np
import pytest

from pasfhn.model import ModelParams, solve_equilibrium
from pasfhn.source import SourceParams


@pytest.fixture(scope="session")
def model():
    return ModelParams(epsilon=0.5, gamma=8.0, beta=6.0, rho=0.0)


@pytest.fixture(scope="session")
def eq():
    return solve_equilibrium(6.0, 8.0)


@pytest.fixture
def source():
    return SourceParams(a=0.3, b=0.2, d1=0.75, d2=1.0, x0=0.5, omega1=100.0, eta=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None:
        return
    ran = {int(r.nodeid.split("criterion_")[1].split("_")[0])
           for key in ("passed", "failed", "error")
           for r in terminalreporter.stats.get(key, []) if "criterion_" in r.nodeid}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ran):
        ok, detail = mod.RESULTS.get(n, (False, "did not complete"))
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
