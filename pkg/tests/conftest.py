import re

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")
_outcomes = {}
_measured = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call":
        _measured[key] = [f"{name}={value}" for name, value in report.user_properties]
    failed = report.failed or (report.when == "call" and report.skipped)
    if failed:
        _outcomes[key] = "FAIL"
    elif report.when == "call":
        _outcomes.setdefault(key, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), outcome in sorted(_outcomes.items()):
        detail = ", ".join(_measured.get((num, name), []))
        terminalreporter.write_line(f"criterion {num:2d} {name.replace('_', ' ')}: {outcome}  {detail}".rstrip())
