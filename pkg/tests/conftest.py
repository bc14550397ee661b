"""Prints one pass/fail line per acceptance criterion at the end of the session."""

_RESULTS = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        props = dict(report.user_properties)
        _RESULTS[report.nodeid] = (report.outcome, props.get("label", report.nodeid), props.get("measured", ""))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_RESULTS, key=lambda n: int(n.split("test_criterion_")[1].split("_")[0])):
        outcome, label, measured = _RESULTS[nodeid]
        mark = "PASS" if outcome == "passed" else "FAIL"
        line = f"{mark}  {label}"
        if measured:
            line += f"  [{measured}]"
        terminalreporter.write_line(line)
