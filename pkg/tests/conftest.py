import sys
import time

SUITE_LIMIT_S = 300.0


def pytest_sessionstart(session):
    session.config._acceptance_t0 = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - config._acceptance_t0
    mod = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", {}) if mod else {}
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(mod.format_line(k))
    ok = elapsed <= SUITE_LIMIT_S
    terminalreporter.write_line(f"full suite runtime {elapsed:.1f} s (limit {SUITE_LIMIT_S:.0f} s): {'PASS' if ok else 'FAIL'}")


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - session.config._acceptance_t0
    if elapsed > SUITE_LIMIT_S and exitstatus == 0:
        session.exitstatus = 1
