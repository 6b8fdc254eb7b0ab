import numpy as np
import pytest
from hypothesis import settings

from polychain import build_horicycle_chain, build_hyperbolic_chain, build_linear_chain, build_mixed_chain

# numeric examples have uneven cost; timing is not what these properties check
settings.register_profile("polychain", deadline=None)
settings.load_profile("polychain")

ACCEPTANCE: list = []


def record(criterion: int, name: str, ok: bool, detail: str = ""):
    ACCEPTANCE.append((criterion, name, bool(ok), detail))
    return ok


@pytest.fixture(scope="session")
def hyperbolic():
    return build_hyperbolic_chain(0.3, -0.4 + 0.2j)


@pytest.fixture(scope="session")
def horicycle():
    return build_horicycle_chain(-1, 1)


@pytest.fixture(scope="session")
def mixed():
    return build_mixed_chain(1j)


@pytest.fixture(scope="session")
def linear():
    return build_linear_chain(1, 2, 0.4)


@pytest.fixture(scope="session")
def all_chains(hyperbolic, horicycle, mixed, linear):
    return {"hyperbolic": hyperbolic, "horicycle": horicycle, "mixed": mixed, "linear": linear}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, name, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {crit}: {name}  {detail}")
