from __future__ import annotations

import pytest

# criterion label -> list of (nodeid, passed, message)
_OUTCOMES: dict[str, list[tuple[str, bool, str]]] = {}
_LABELS: dict[str, tuple[str, str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            _LABELS[item.nodeid] = (str(mark.args[0]), mark.kwargs.get("title", ""))


def pytest_runtest_logreport(report):
    label = _LABELS.get(report.nodeid)
    if label is None:
        return
    if report.when == "call" or report.failed:
        msg = ""
        if report.failed:
            msg = str(report.longrepr.reprcrash.message) if hasattr(report.longrepr, "reprcrash") else str(report.longrepr)
            msg = msg.splitlines()[0] if msg else ""
        _OUTCOMES.setdefault(label[0], []).append((report.nodeid, report.passed, msg))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    titles = {crit: title for crit, title in _LABELS.values() if title}
    terminalreporter.section("acceptance criteria")

    def key(c):
        return (0, int(c), "") if c.isdigit() else (1, 0, c)

    for crit in sorted(_OUTCOMES, key=key):
        results = _OUTCOMES[crit]
        failed = [r for r in results if not r[1]]
        status = "FAIL" if failed else "PASS"
        line = f"{status} criterion {crit}: {titles.get(crit, '')} ({len(results) - len(failed)}/{len(results)} checks)"
        if failed:
            line += f" first failure: {failed[0][2][:160]}"
        terminalreporter.write_line(line)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(criterion, title): numbered acceptance criterion")
