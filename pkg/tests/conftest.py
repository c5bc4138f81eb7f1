"""Shared pytest hooks: collect acceptance verdict lines and echo them in the
terminal summary so a plain `pytest -v` run shows one line per criterion."""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
