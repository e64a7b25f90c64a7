import collections

import pytest

_CRITERIA = {}
_OUTCOMES = collections.defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _CRITERIA[m.args[0]] = m.args[1]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _OUTCOMES[m.args[0]].append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_OUTCOMES):
        results = _OUTCOMES[num]
        ok = all(p for _, p in results)
        failed = [name for name, p in results if not p]
        line = f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {_CRITERIA.get(num, '')}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        tr.write_line(line)
