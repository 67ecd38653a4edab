import numpy as np
import pytest

from mcmo.engine import TrainingConfig
from mcmo.kursawe import REFERENCE_POINT, kursawe_problem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def kursawe():
    return kursawe_problem()


@pytest.fixture
def small_config():
    """Tiny networks and few learning iterations for fast loop tests."""
    return TrainingConfig(episodes=30, hidden=(16, 16), learning_iterations=4,
                          batch_size=32, n_reproduce=10, hv_reference=REFERENCE_POINT,
                          log_interval=10, seed=3)


_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """``criterion(ok, detail)`` records a pass/fail line for the current acceptance test."""
    name = request.node.name

    def record(ok: bool, detail: str):
        _ACCEPTANCE[name] = (bool(ok), detail)
        assert ok, detail

    yield record
    if name not in _ACCEPTANCE:
        _ACCEPTANCE[name] = (False, "did not reach its check")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
