import math

import numpy as np
import pytest
from hypothesis import settings

from ehcost import Instance

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

E1 = math.e - 1.0


def make(p_inv, arrivals, alpha=1.0, beta=0.2, storage=0.0, epsilon=0.0):
    """Instance with rate = noise = 1 whose inversion powers are ``p_inv``."""
    gains = E1 / np.asarray(p_inv, dtype=float)
    return Instance(1.0, 1.0, alpha, beta, gains, arrivals, initial_storage=storage, epsilon=epsilon)


def rayleigh(rng, n, high=1.0, storage=0.0, epsilon=0.0):
    return Instance(1.0, 1.0, 1.0, 0.2, rng.exponential(size=n), high * rng.uniform(size=n),
                    initial_storage=storage, epsilon=epsilon)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LOG = []


def record_criterion(number, title, ok, detail=""):
    ACCEPTANCE_LOG.append((number, title, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE_LOG):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number:>2}. {title}" + (f"  [{detail}]" if detail else ""))
