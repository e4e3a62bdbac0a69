import numpy as np
import pytest

from subarray_dpd import _kernels_py, kernels

try:
    from subarray_dpd import _kernels_ext
except ImportError:  # extension not built
    _kernels_ext = None

BACKENDS = {"python": _kernels_py}
if _kernels_ext is not None:
    BACKENDS["cython"] = _kernels_ext


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Route every kernel call through one backend."""
    impl = BACKENDS[request.param]
    monkeypatch.setattr(kernels, "ph_eval", impl.ph_eval)
    monkeypatch.setattr(kernels, "snl_basis", impl.snl_basis)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def cgauss(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


ACCEPTANCE_LINES = []


def record_criterion(number: int, title: str, ok: bool, detail: str):
    """Store the verdict line for one acceptance criterion."""
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} | {detail}"
    ACCEPTANCE_LINES.append((number, line))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
