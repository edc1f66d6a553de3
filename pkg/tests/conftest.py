import math

import pytest

from marangoni.geometry import BoxGeometry
from marangoni.linear import critical_marangoni
from marangoni.params import StabilityParams
from marangoni.transitions import hex_classifier, single_mode_classifier

HEX_L2 = 3.02


@pytest.fixture(scope="session")
def roll_box():
    return BoxGeometry(1.5, 1.0)


@pytest.fixture(scope="session")
def hex_box():
    return BoxGeometry(2 * HEX_L2 / math.sqrt(3), HEX_L2)


@pytest.fixture(scope="session")
def roll_critical(roll_box):
    return critical_marangoni(roll_box, 0.0)


@pytest.fixture(scope="session")
def hex_critical(hex_box):
    return critical_marangoni(hex_box, 0.0)


@pytest.fixture(scope="session")
def hex_report(hex_box, hex_critical):
    return hex_classifier(hex_box, StabilityParams(1.0, 0.0, hex_critical.lambda_c))


@pytest.fixture(scope="session")
def roll_report(roll_box, roll_critical):
    return single_mode_classifier(roll_box, StabilityParams(1.0, 0.0, roll_critical.lambda_c))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
