_results: dict[str, list[bool]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", str(mark.args[0])))


def pytest_runtest_logreport(report):
    if report.when == "call" or report.failed:
        for key, value in report.user_properties:
            if key == "criterion":
                _results.setdefault(value, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_results, key=lambda c: (int(c[0]), c)):
        verdict = "PASS" if all(_results[crit]) else "FAIL"
        terminalreporter.write_line(f"criterion {crit}: {verdict}")
