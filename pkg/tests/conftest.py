"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""

import pytest

_results: dict[int, list[tuple[str, str, str]]] = {}
_TITLES = {
    1: "oracle equivalence (covering, sliced, bars exhaustive)",
    2: "golden figure examples",
    3: "space trends",
    4: "time behaviour",
    5: "primitive suites",
    6: "erratum regressions",
}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    n = marker.args[0]
    outcome = "PASS" if call.excinfo is None else "FAIL"
    detail = getattr(item, "acceptance_detail", "")
    if call.excinfo is not None:
        detail = str(call.excinfo.value).splitlines()[0][:160]
    _results.setdefault(n, []).append((item.name, outcome, detail))


@pytest.fixture
def record(request):
    """Attach a short measurement summary to the acceptance line."""

    def _record(text: str) -> None:
        request.node.acceptance_detail = text

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        parts = _results[n]
        status = "PASS" if all(o == "PASS" for _, o, _ in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {n} [{status}] {_TITLES.get(n, '')}")
        for name, outcome, detail in parts:
            terminalreporter.write_line(f"    {outcome} {name}: {detail}")
