from hypothesis import settings

# numba compilation on first call makes per-example timing meaningless
settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

CRITERION_LINES = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERION_LINES):
            terminalreporter.write_line(line)
