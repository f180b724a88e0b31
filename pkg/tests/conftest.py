import pytest

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion.

    Usage: ``with criterion(3) as note: ...; note("detail")``.  The line is
    marked FAIL unless the block completes without raising.
    """
    from contextlib import contextmanager

    @contextmanager
    def record(number: int):
        details: list[str] = []
        ACCEPTANCE_RESULTS[number] = (False, "did not complete")
        try:
            yield details.append
        except BaseException as exc:
            ACCEPTANCE_RESULTS[number] = (False, "; ".join(details + [f"{type(exc).__name__}: {exc}"])[:400])
            print(f"\nCRITERION {number}: FAIL - {ACCEPTANCE_RESULTS[number][1]}")
            raise
        ACCEPTANCE_RESULTS[number] = (True, "; ".join(details))
        print(f"\nCRITERION {number}: PASS - {ACCEPTANCE_RESULTS[number][1]}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
