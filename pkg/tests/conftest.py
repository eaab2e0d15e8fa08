import pytest
from hypothesis import settings

from fransdcp.geometry import NetworkParams
from fransdcp.model import (HardwareProfile, TaskProfile, delay_budget,
                            derive_service_rates)
from fransdcp.stp import ergodic_uplink_rate

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def net():
    return NetworkParams.from_cluster_param(1e-4)


@pytest.fixture(scope="session")
def task():
    return TaskProfile()


@pytest.fixture(scope="session")
def hw():
    return HardwareProfile()


@pytest.fixture(scope="session")
def rates(task, hw):
    return derive_service_rates(task, hw, "per_task")


@pytest.fixture(scope="session")
def budget(net, task, hw):
    return delay_budget(task, hw, ergodic_uplink_rate(net))


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record one acceptance line: ``acceptance(n, ok, detail, elapsed, limit)``."""
    def record(n, ok, detail, elapsed, limit):
        in_time = elapsed < limit
        verdict = "PASS" if ok and in_time else "FAIL"
        _ACCEPTANCE[n] = (f"{verdict} criterion {n}: {detail} "
                          f"[{elapsed:.2f} s, limit {limit:g} s]")
        print(_ACCEPTANCE[n])
        return ok and in_time
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
