"""Collects the one-line verdicts of the acceptance criteria for the terminal summary."""

_LINES: list[str] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    lines = [v for k, v in report.user_properties if k == "acceptance"]
    if not lines and report.failed:
        lines = [f"FAIL {report.nodeid.split('::')[-1]}: raised before reaching its verdict"]
    _LINES.extend(lines)


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
