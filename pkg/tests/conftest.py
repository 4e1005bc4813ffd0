import collections

import pytest

# criterion number -> list of (part, ok, detail)
CRITERIA = collections.defaultdict(list)


class Recorder:
    def __init__(self, number, part):
        self.number = number
        self.part = part

    def check(self, ok, detail=""):
        CRITERIA[self.number].append((self.part, bool(ok), detail))
        assert ok, f"criterion {self.number} ({self.part}): {detail}"


@pytest.fixture
def criterion(request):
    mark = request.node.get_closest_marker("criterion")
    number, part = mark.args
    return Recorder(number, part)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, part): acceptance criterion")


def pytest_runtest_makereport(item, call):
    # a test that raised before reaching its check still counts as a failure
    mark = item.get_closest_marker("criterion")
    if mark and call.when == "call" and call.excinfo is not None:
        number, part = mark.args
        if not any(p == part for p, _, _ in CRITERIA[number]):
            CRITERIA[number].append((part, False, call.excinfo.exconly()[:200]))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(CRITERIA):
        parts = CRITERIA[number]
        ok = all(p[1] for p in parts)
        tr.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}")
        for part, pok, detail in parts:
            tr.write_line(f"    [{'ok' if pok else 'FAIL'}] {part}: {detail}")
