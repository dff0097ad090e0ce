import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lipdecay.losses import Dataset
from lipdecay.network import Params

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE_LINES = []


@pytest.fixture
def report_criterion():
    """Record a ``criterion k: PASS|FAIL`` line; all lines are echoed in the terminal summary."""
    def record(k, passed, detail=""):
        line = f"criterion {k}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip()
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def random_params(rng, d, p, scale=1.0):
    return Params(W=scale * rng.standard_normal((p, d)), B=scale * rng.standard_normal(p),
                  b=scale * rng.standard_normal(p), c=float(scale * rng.standard_normal()))


def random_data(rng, N, d):
    return Dataset(rng.standard_normal((N, d)), rng.standard_normal(N))
