import pytest

_ACCEPTANCE = {}


class CriterionRecorder:
    """Collects named checks for one acceptance criterion."""

    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.checks = []

    def check(self, ok, detail):
        self.checks.append((bool(ok), detail))
        return bool(ok)

    @property
    def passed(self):
        return bool(self.checks) and all(ok for ok, _ in self.checks)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        details = "; ".join(("" if ok else "FAILED ") + d for ok, d in self.checks)
        return f"[{status}] criterion {self.number} ({self.title}): {details}"

    def finish(self):
        # print immediately (visible with -s) and keep for the terminal summary
        print(self.line())
        failed = [d for ok, d in self.checks if not ok]
        assert not failed, "; ".join(failed)


@pytest.fixture
def criterion():
    def make(number, title):
        rec = CriterionRecorder(number, title)
        _ACCEPTANCE[number] = rec
        return rec

    return make


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number].line())
