import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hawkes_ldp import Constant, ExcitationKernel, ProcessParams  # noqa: E402
from hawkes_ldp.mc import simulate_terminal  # noqa: E402

# (number, title, outcome, detail) for every acceptance criterion that ran
CRITERIA = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    CRITERIA.append((number, title, "PASS" if rep.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, verdict, detail in sorted(CRITERIA):
        line = f"criterion {number:>2} {verdict}: {title}"
        if detail:
            line += f" | {detail}"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def jit_warm():
    """Compile (or load) the simulation kernels once, outside any timed region."""
    p = ProcessParams(1.0, ExcitationKernel.explicit([0.5]), Constant(1.0))
    simulate_terminal(p, 5, 8, seed=0, workers=1)
    return True


@pytest.fixture
def base_params():
    """nu = 1, kernel [0.5], unit marks: LLN mean 2, CLT variance 8."""
    return ProcessParams(1.0, ExcitationKernel.explicit([0.5]), Constant(1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
