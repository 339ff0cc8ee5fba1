import numpy as np
import pytest
from hypothesis import settings

from activeflux.mesh import structured_mesh

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def perturbed_mesh(n, seed=0, amplitude=0.25, domain=(0.0, 1.0, 0.0, 1.0)):
    """Structured mesh with interior vertices jittered, so nothing is grid-aligned."""
    rng = np.random.default_rng(seed)
    x0, x1, y0, y1 = domain
    hx, hy = (x1 - x0) / n, (y1 - y0) / n

    def jitter(v):
        v = v.copy()
        inner = (v[:, 0] > x0 + 1e-12) & (v[:, 0] < x1 - 1e-12) & (v[:, 1] > y0 + 1e-12) & (v[:, 1] < y1 - 1e-12)
        v[inner, 0] += amplitude * hx * rng.uniform(-1, 1, inner.sum())
        v[inner, 1] += amplitude * hy * rng.uniform(-1, 1, inner.sum())
        return v

    return structured_mesh(n, n, domain, jitter)


@pytest.fixture
def small_mesh():
    return structured_mesh(4, 4)


@pytest.fixture
def jittered_mesh():
    return perturbed_mesh(6, seed=3)


# ---------------------------------------------------------------- acceptance report

_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """``record(number, passed, detail)``: one summary line per acceptance criterion."""

    def record(number, passed, detail):
        _ACCEPTANCE[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE, key=str):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
