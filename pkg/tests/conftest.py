import pytest

_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion.

    The line is filled in from the test outcome; ``note`` adds measured values.
    """
    number = request.node.get_closest_marker("criterion").args[0]
    entry = {"number": number, "title": request.node.get_closest_marker("criterion").args[1],
             "notes": []}
    _ACCEPTANCE.setdefault(number, []).append((request.node.nodeid, entry))
    return entry["notes"].append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    for nodeid, entry in _ACCEPTANCE.get(marker.args[0], []):
        if nodeid == item.nodeid:
            entry["passed"] = rep.passed


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        entries = [e for _, e in _ACCEPTANCE[number]]
        ok = all(e.get("passed", False) for e in entries)
        notes = "; ".join(n for e in entries for n in e["notes"])
        tr.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  "
                      f"{entries[0]['title']}" + (f"  [{notes}]" if notes else ""))
