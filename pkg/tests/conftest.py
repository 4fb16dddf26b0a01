import numpy as np
import pytest

from stirmix.mesh import build_disk_mesh
from stirmix.stokes import TaylorHoodSpace
from stirmix.transport import DGSpace

# filled by test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: dict = {}


@pytest.fixture(scope="session")
def mesh01():
    return build_disk_mesh(0.1)


@pytest.fixture(scope="session")
def mesh02():
    return build_disk_mesh(0.2)


@pytest.fixture(scope="session")
def th01(mesh01):
    return TaylorHoodSpace(mesh01)


@pytest.fixture(scope="session")
def th02(mesh02):
    return TaylorHoodSpace(mesh02)


@pytest.fixture(scope="session")
def dg01(mesh01):
    return DGSpace(mesh01, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _criterion_lines(lines: dict) -> list:
    """One line per criterion; the property sub-checks of 9 are folded into one verdict."""
    order = sorted(lines, key=lambda k: (int("".join(c for c in k if c.isdigit())), k))
    subs = [k for k in order if k[0] == "9" and len(k) > 1]
    out = []
    for key in order:
        if key in subs:
            if key == subs[0]:
                bad = [k for k in subs if ": FAIL" in lines[k]]
                verdict = "FAIL" if bad else "PASS"
                note = f"failing: {', '.join(bad)}" if bad else "all hold"
                out.append(f"CRITERION 9: {verdict} - {len(subs) - len(bad)}/{len(subs)} properties hold, {note}")
            out.append("    " + lines[key])
        else:
            out.append(lines[key])
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _criterion_lines(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
