import contextlib

import pytest

_KEY = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion and print it."""
    results = request.config.stash.setdefault(_KEY, {})

    @contextlib.contextmanager
    def record(number, title):
        try:
            yield
        except BaseException as exc:
            detail = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
            results[number] = f"criterion {number}: FAIL  {title}  ({detail})"
            print(results[number])
            raise
        results[number] = f"criterion {number}: PASS  {title}"
        print(results[number])

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_KEY, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
