import time

import pytest

CRITERIA = {
    1: "CPM oracle equivalence",
    2: "formula oracles",
    3: "known-value checks",
    4: "SGCI planted-event recovery",
    5: "GED planted-event recovery",
    6: "end-to-end prediction, tree vs naive Bayes",
    7: "event-correspondence table",
    8: "pipeline determinism",
    9: "SGCI coexistence rules",
}

_outcomes: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n = marker.args[0]
    state = _outcomes.setdefault(n, {"passed": True, "seconds": 0.0, "seen": False})
    state["seen"] = True
    state["seconds"] += report.duration
    if report.failed or (report.when == "call" and report.skipped):
        state["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, name in CRITERIA.items():
        state = _outcomes.get(n)
        if state is None or not state["seen"]:
            terminalreporter.write_line(f"criterion {n}: NOT RUN  {name}")
            continue
        verdict = "PASS" if state["passed"] else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {name} ({state['seconds']:.1f} s)")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240601)


@pytest.fixture
def stopwatch():
    class Watch:
        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.start

    return Watch
