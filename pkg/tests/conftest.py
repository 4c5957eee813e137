import pytest

# criterion number -> (passed, detail), filled by the acceptance suite
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def verdict():
    """Record one acceptance criterion; the terminal summary prints every record."""

    def record(n: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[n] = (bool(passed), detail)
        print(f"\nAC{n} {'PASS' if passed else 'FAIL'}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"AC{n:<2} {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    name = item.name
    if rep.when == "call" and rep.failed and name.startswith("test_ac"):
        n = int(name[len("test_ac"):].split("_")[0])
        if ACCEPTANCE.get(n, (True,))[0]:
            ACCEPTANCE[n] = (False, f"{name} raised {call.excinfo.typename}")
