"""Compiled-extension vs NumPy quadrature backends: identical semantics."""
import os
import subprocess
import sys

import numpy as np
import pytest

from cpfsim import _kernels_py
from cpfsim._backend import backend_name

try:
    from cpfsim import _kernels

    HAVE_EXT = True
except ImportError:
    HAVE_EXT = False

needs_ext = pytest.mark.skipif(not HAVE_EXT, reason="compiled extension not built")


def sample_problem(n=300, m=200, h=0.01, complex_kernel=False):
    ts = np.arange(n + m + 1) * h
    f = 0.5 * np.exp(-ts).astype(complex)
    if complex_kernel:
        f = f * np.exp(0.3j * ts)
    return f, h


@needs_ext
def test_volterra_backends_agree():
    for complex_kernel in (False, True):
        f, h = sample_problem(complex_kernel=complex_kernel)
        a = _kernels_py.volterra_trapezoid(f, h)
        b = _kernels.volterra_trapezoid(f, h)
        assert np.max(np.abs(a - b)) < 1e-13


@needs_ext
def test_two_time_backends_agree():
    for complex_kernel in (False, True):
        f, h = sample_problem(complex_kernel=complex_kernel)
        n, m = 300, 200
        G = _kernels_py.volterra_trapezoid(f[: n + 1], h)
        a = _kernels_py.two_time_trapezoid(f, G[: n + 1], G[: m + 1], h)
        b = _kernels.two_time_trapezoid(f, G[: n + 1], G[: m + 1], h)
        assert a.shape == b.shape == (n + 1, m + 1)
        assert np.max(np.abs(a - b)) < 1e-13


@needs_ext
def test_extension_selected_by_default():
    if os.environ.get("CPFSIM_PURE_PYTHON", "").strip() in ("", "0"):
        assert backend_name() == "cython"


def test_env_var_forces_python_backend():
    code = "import cpfsim; print(cpfsim.backend_name())"
    env = dict(os.environ, CPFSIM_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "numpy"


def test_short_inputs():
    f = np.array([0.5 + 0j])
    assert _kernels_py.volterra_trapezoid(f, 0.01)[0] == 1.0
    G = np.array([1.0 + 0j])
    out = _kernels_py.two_time_trapezoid(np.array([0.5 + 0j]), G, G, 0.01)
    assert out.shape == (1, 1)
    assert out[0, 0] == 0.0


def test_kernel_length_validation():
    f, h = sample_problem()
    G = _kernels_py.volterra_trapezoid(f[:301], h)
    with pytest.raises(ValueError):
        _kernels_py.two_time_trapezoid(f[:400], G, G, h)  # needs 601 samples
