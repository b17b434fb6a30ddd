import os
import zlib

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng(request):
    # one stream per test, stable across runs
    return np.random.default_rng(zlib.crc32(request.node.nodeid.encode()))


ACCEPTANCE = pytest.StashKey[dict]()
N_CRITERIA = 10


@pytest.fixture
def verdict(request):
    """Record ``(passed, detail)`` for an acceptance criterion number."""
    results = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(number, passed, detail):
        results[number] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        if n not in results:
            terminalreporter.write_line(f"criterion {n:2d}: NOT RUN")
            continue
        passed, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
