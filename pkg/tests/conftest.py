import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


# one summary line per acceptance criterion
_CRITERIA = {}


def pytest_runtest_logreport(report):
    # setup time counts too: shared fixtures do the heavy lifting
    if report.when == "teardown":
        return
    for mark in report.keywords:
        if mark.startswith("criterion_"):
            outcome, dur = _CRITERIA.get(mark, ("passed", 0.0))
            if report.outcome != "passed" or report.when == "call":
                outcome = report.outcome
            _CRITERIA[mark] = (outcome, dur + report.duration)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.keywords[f"criterion_{m.args[0]:02d} {m.args[1]}"] = True


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        outcome, dur = _CRITERIA[key]
        tag = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{tag}  {key[len('criterion_'):]}  ({dur:.1f} s)")
