"""Per-criterion PASS/FAIL summary for tests marked ``acceptance``."""

from collections import OrderedDict

import pytest

_results = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m:
            _results.setdefault(m.args[0], {"title": m.args[1], "outcomes": []})


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is None:
        return
    if rep.when == "call" or rep.failed:
        _results[m.args[0]]["outcomes"].append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, entry in _results.items():
        outs = entry["outcomes"]
        if not outs:
            status = "NOT RUN"
        else:
            status = "PASS" if all(outs) else "FAIL"
        tr.write_line(f"criterion {number}: {status:7s} {entry['title']} ({sum(outs)}/{len(outs)} checks)")
