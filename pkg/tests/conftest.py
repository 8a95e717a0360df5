import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qnvp_lab.phase_space import PhaseGrid, VelocityGrid
from qnvp_lab.spectral import PhysParams, TorusGrid

settings.register_profile(
    "lab", max_examples=12, deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow],
)
settings.load_profile("lab")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def grid16():
    return TorusGrid(16)


@pytest.fixture(scope="session")
def pg():
    """Coarse position grid with the production velocity grid."""
    return PhaseGrid(TorusGrid(16), VelocityGrid(32))


@pytest.fixture(scope="session")
def pg_small():
    return PhaseGrid(TorusGrid(8), VelocityGrid(16))


@pytest.fixture(scope="session")
def params16():
    x, _ = TorusGrid(16).mesh
    return PhysParams(epsilon=0.7, lam=1.3, delta=0.3, b_field=1.0 + 0.2 * np.cos(x))


def rel(a, b):
    return float(np.linalg.norm(np.ravel(a - b)) / max(np.linalg.norm(np.ravel(b)), 1e-300))


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", {})
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for n in sorted(verdicts):
            for line in verdicts[n]:
                terminalreporter.write_line(line)
