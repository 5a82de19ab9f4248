"""Collects per-criterion verdicts from tests marked ``criterion(n)``."""
import pytest

_VERDICTS: dict[int, list] = {}
_TITLES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    _TITLES[n] = title
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        ok = rep.passed and not hasattr(rep, "wasxfail")
        notes = [v for k, v in item.user_properties if k == "detail"]
        if hasattr(rep, "wasxfail"):
            notes.append("expected failure: " + rep.wasxfail)
        elif rep.failed:
            notes.append(rep.longrepr.reprcrash.message if hasattr(rep.longrepr, "reprcrash") else "error")
        _VERDICTS.setdefault(n, []).append((item.name, ok, notes))


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        parts = _VERDICTS[n]
        ok = all(p[1] for p in parts)
        notes = "; ".join(note for _, _, ns in parts for note in ns)
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {_TITLES[n]}" + (f"  [{notes}]" if notes else ""))
