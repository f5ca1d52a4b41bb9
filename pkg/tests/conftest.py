import pytest

_lines: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for the criterion named by the test's marker."""
    number, title = request.node.get_closest_marker("criterion").args
    recorded = []

    def record(ok: bool, detail: str = "") -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        recorded.append(line)
        _lines.append(line)
        print(line)
        return ok

    yield record
    if not recorded:
        _lines.append(f"criterion {number:>2}: FAIL  {title}  [did not complete]")


def pytest_terminal_summary(terminalreporter):
    if _lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
