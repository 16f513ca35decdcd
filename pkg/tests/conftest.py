import numpy as np
import pytest

from nctorus import algebra
from nctorus import circlefn as cf
from nctorus.circlefn import Const, Ramp

ACCEPTANCE_RESULTS = {}


def random_circle_function(rng, pieces=None, profiles=None):
    """Continuous piecewise function joining random levels with random ramps."""
    pieces = pieces or int(rng.integers(2, 6))
    starts = np.sort(rng.uniform(0.0, 1.0, pieces))
    lengths = np.diff(np.append(starts, starts[0] + 1.0))
    levels = rng.uniform(-1.0, 1.0, pieces)
    names = list(profiles or cf.PROFILES)
    arcs = []
    for i in range(pieces):
        # ramp over most of the arc, then hold the next level
        ramp_len = lengths[i] * rng.uniform(0.3, 0.9)
        nxt = levels[(i + 1) % pieces]
        prof = cf.PROFILES[names[rng.integers(len(names))]]
        arcs.append((starts[i], ramp_len, Ramp(prof, starts[i], ramp_len, levels[i], nxt - levels[i])))
        arcs.append((starts[i] + ramp_len, lengths[i] - ramp_len, Const(nxt)))
    return cf.from_arcs(arcs)


def random_element(rng, theta, max_order=3):
    M = int(rng.integers(0, max_order + 1))
    ks = [k for k in range(-M, M + 1) if rng.uniform() < 0.7] or [0]
    return algebra.TorusElement(theta, {k: random_circle_function(rng) for k in ks})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, label = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key:>2}: {label}")
