import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from spinboson.bath import BathParams
from spinboson.cumulant import SystemParams

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

PLUS = np.full((2, 2), 0.5, dtype=complex)


@pytest.fixture
def bath_weak():
    """gamma = 5 w0, lambda/gamma = 0.01, beta w0 = 2."""
    return BathParams.from_ratios(0.01, 5.0, 2.0)


@pytest.fixture
def bath_dephasing():
    """beta w0 = 4, lambda/gamma = 1/4, gamma = 5 w0."""
    return BathParams.from_ratios(0.25, 5.0, 4.0)


@pytest.fixture
def sx():
    return SystemParams(1.0, 1.0)


@pytest.fixture
def composite():
    return SystemParams(1.0, 1.0, 0.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_state(rng, d=2, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


# acceptance criteria: outcome and measured values per criterion number
CRITERIA = {}


def _entry(item):
    n, title = item.get_closest_marker("criterion").args
    return n, CRITERIA.setdefault(n, {"title": title, "ok": True, "notes": []})


@pytest.fixture
def note(request):
    """Record a measured value shown in the acceptance summary."""
    if request.node.get_closest_marker("criterion") is None:
        return print
    _, entry = _entry(request.node)

    def add(msg):
        print(msg)
        entry["notes"].append(msg)
    return add


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    if item.get_closest_marker("criterion") is not None and rep.when == "call":
        _, entry = _entry(item)
        entry["ok"] = entry["ok"] and rep.passed
    return rep


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        e = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if e['ok'] else 'FAIL'}  "
                                    f"{e['title']}")
        for msg in e["notes"]:
            terminalreporter.write_line(f"    {msg}")
