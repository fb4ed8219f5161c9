import pytest

_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, ok, detail)``."""
    def record(number, ok, detail):
        key = (number, len(_CRITERIA), request.node.name)
        _CRITERIA[key] = (bool(ok), detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (number, _, name), (ok, detail) in sorted(_CRITERIA.items()):
        terminalreporter.write_line(
            f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {name}: {detail}")
