import pytest

from psc_tsa import load_config

_criteria: dict[str, dict] = {}


@pytest.fixture(scope="session")
def case1():
    return load_config("case1")


@pytest.fixture(scope="session")
def case2():
    return load_config("case2")


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    entry = _criteria.setdefault(crit, {"ok": True, "title": dict(report.user_properties)["title"]})
    if report.failed or (report.when == "call" and report.skipped):
        entry["ok"] = False


@pytest.fixture
def criterion(record_property):
    def mark(number: str, title: str):
        record_property("criterion", number)
        record_property("title", title)

    return mark


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")

    def key(item):
        num, sub = item[0], ""
        while num and not num[-1].isdigit():
            num, sub = num[:-1], num[-1] + sub
        return int(num), sub

    for number, entry in sorted(_criteria.items(), key=key):
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {number:<4} {entry['title']}")
