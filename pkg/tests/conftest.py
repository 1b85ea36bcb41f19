import time

SUITE_BUDGET_SECONDS = 300.0

# (criterion, passed, detail) rows filled in by test_acceptance
ACCEPTANCE: list[tuple[str, bool, str]] = []


def report(criterion: str, passed: bool, detail: str) -> bool:
    ACCEPTANCE.append((criterion, bool(passed), detail))
    print(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    return passed


def pytest_sessionstart(session):
    session.config._escycles_start = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - session.config._escycles_start
    session.config._escycles_elapsed = elapsed
    if ACCEPTANCE and elapsed > SUITE_BUDGET_SECONDS:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    elapsed = getattr(config, "_escycles_elapsed", time.perf_counter() - config._escycles_start)
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE:
        tr.write_line(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    ok = elapsed <= SUITE_BUDGET_SECONDS
    tr.write_line(f"[{'PASS' if ok else 'FAIL'}] C12 suite runtime: {elapsed:.1f} s (limit {SUITE_BUDGET_SECONDS:.0f} s)")
