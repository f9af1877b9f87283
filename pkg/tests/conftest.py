import pytest

CRITERIA = {
    1: "FPTAS (1-eps) guarantee on random additive instances",
    2: "PARTITION reduction",
    3: "scaling bounds on random XOS trials",
    4: "XOS pipeline ratio bound",
    5: "value-query pipeline ratio bound and approximate demand",
    6: "supporting lemmas as properties",
    7: "subadditive lower-bound family at n=16",
    8: "XOS lower-bound family at n=10 and n=100",
    9: "bench determinism",
}

RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    def _record(number: int, passed: bool, detail: str = "") -> None:
        RESULTS[number] = (passed, detail)
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {CRITERIA[number]}"
        print(line + (f" ({detail})" if detail else ""))
    return _record


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        if number not in RESULTS:
            terminalreporter.write_line(f"[SKIP] criterion {number}: {CRITERIA[number]} (not run)")
            continue
        passed, detail = RESULTS[number]
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {CRITERIA[number]}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
