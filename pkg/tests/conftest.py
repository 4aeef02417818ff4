import numpy as np
import pytest

from ousparse.ou import ObservationSet


def random_stable(d, rng, margin=0.2):
    """Random matrix whose eigenvalues all have real part >= margin."""
    m = rng.normal(size=(d, d))
    shift = margin - np.linalg.eigvals(m).real.min()
    return m + max(shift, 0.0) * np.eye(d)


def random_obs(d, n, rng, delta=0.1, scale=1.0):
    """Random-walk style observation set (no model behind it)."""
    steps = rng.normal(scale=scale * np.sqrt(delta), size=(n, d))
    x0 = rng.normal(size=(1, d))
    obs = np.vstack([x0, x0 + np.cumsum(steps, axis=0)])
    obs -= 0.5 * obs.mean(axis=0)
    return ObservationSet(delta, obs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = {}


def record_acceptance(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
