import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")

# criterion number -> list of (test id, outcome, note)
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return rep
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        n, title = mark.args
        if hasattr(rep, "wasxfail"):
            outcome, note = "FAIL", rep.wasxfail
        elif rep.passed:
            outcome, note = "PASS", ""
        elif rep.skipped:
            outcome, note = "SKIP", ""
        else:
            outcome, note = "FAIL", "assertion failed"
        _CRITERIA.setdefault(n, [title, []])[1].append((item.name, outcome, note))
    return rep


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, results = _CRITERIA[n]
        ok = all(o == "PASS" for _, o, _ in results)
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}"
        tr.write_line(line)
        if not ok:
            for name, outcome, note in results:
                if outcome != "PASS":
                    tr.write_line(f"    {name}: {outcome} ({note})")
