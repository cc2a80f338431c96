"""Shared fixtures and the per-criterion acceptance summary."""

from __future__ import annotations

from collections import OrderedDict

import pytest

from semirate.families import parse_family

_CRITERIA: "OrderedDict[int, dict]" = OrderedDict()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    entry = _CRITERIA.setdefault(num, {"title": title, "passed": True, "tests": 0})
    if report.when == "call" or (report.when == "setup" and report.failed):
        entry["tests"] += 1
    if report.when in ("setup", "call") and report.failed:
        entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        entry = _CRITERIA[num]
        status = "PASS" if entry["passed"] else "FAIL"
        terminalreporter.write_line(f"criterion {num:>2}: {status}  {entry['title']} ({entry['tests']} tests)")


@pytest.fixture(autouse=True)
def _witness_dir(tmp_path, monkeypatch):
    # keep violation witnesses out of the working tree
    monkeypatch.setenv("SEMIRATE_WITNESS_DIR", str(tmp_path / "witnesses"))


@pytest.fixture(scope="session")
def diag_imag():
    return parse_family("diag-imag(64,10)")


@pytest.fixture(scope="session")
def diag_pos():
    return parse_family("diag-pos(64,10)")


@pytest.fixture(scope="session")
def small_pos():
    return parse_family("diag-pos(16,10)")
