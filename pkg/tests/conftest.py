import math

import pytest

from chshzones import MeasurementSetting

PI4 = math.pi / 4
TABLE1_ROW1 = (2.070, 1.466, 1.372, 0.769)
TABLE1_ROW3 = (1.316, 2.894, 1.033, 2.606)
TABLE3_ROW1 = (0.40, 3.02, 2.72, 2.38)
TABLE3_ROW2 = (1.97, 1.31, 1.22, 0.83)


@pytest.fixture
def table3_row1():
    return MeasurementSetting.from_angles(TABLE3_ROW1, PI4)


@pytest.fixture
def table3_row2():
    return MeasurementSetting.from_angles(TABLE3_ROW2, PI4)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
