import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

ACCEPTANCE = []


def record_criterion(number, description, passed, detail=""):
    ACCEPTANCE.append((number, description, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, desc, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        tag = "PASS" if passed else "FAIL"
        line = f"[{tag}] criterion {number}: {desc}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
