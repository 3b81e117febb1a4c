import numpy as np
import pytest


def sign_align(Y, ref):
    """Flip rows of ``Y`` so each correlates non-negatively with ``ref``."""
    Y = np.array(Y, dtype=float, copy=True)
    for k in range(Y.shape[0]):
        if np.dot(Y[k], ref[k]) < 0:
            Y[k] = -Y[k]
    return Y


def max_aligned_dev(Y, ref):
    return float(np.abs(sign_align(Y, ref) - ref).max())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test still asserts on ``ok``."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
