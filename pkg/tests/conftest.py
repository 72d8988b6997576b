"""Collects acceptance verdicts and prints them at the end of the run."""

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE):
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}: {detail}")
