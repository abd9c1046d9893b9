from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from fraclap import kernels
from fraclap.grid import make_grid, sample
from fraclap.operators import _stencil

needs_compiled = pytest.mark.skipif(kernels.compiled_impl is None, reason="compiled kernel not built")


def _case(dim, n):
    g = make_grid(dim, n, 10.0)
    st = _stencil(g, 1.1, 4 * g.spacing, "taylor-window")
    return sample("gaussian:1,1.5", g).values, st.offsets, st.weights


@needs_compiled
@pytest.mark.parametrize("dim, n", [(1, 64), (1, 512), (2, 32)])
def test_compiled_matches_python_bitwise(dim, n):
    psi, off, w = _case(dim, n)
    assert np.array_equal(kernels.compiled_impl(psi, off, w), kernels.python_impl(psi, off, w))


@needs_compiled
def test_compiled_deterministic():
    psi, off, w = _case(1, 256)
    a = kernels.compiled_impl(psi, off, w)
    assert all(np.array_equal(a, kernels.compiled_impl(psi, off, w)) for _ in range(5))


def test_python_kernel_on_constant_is_zero():
    g = make_grid(1, 32, 1.0)
    off = np.array([[1], [2], [16]])
    out = kernels.python_impl(np.full(g.shape, 4.0), off, np.array([1.0, 0.5, 0.25]))
    assert np.all(out == 0.0)


def test_python_kernel_simple_offsets():
    psi = np.zeros(16)
    psi[0] = 1.0
    out = kernels.python_impl(psi, np.array([[1]]), np.array([2.0]))
    assert out[0] == 4.0 and out[1] == -2.0 and out[-1] == -2.0


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")


def test_environment_forces_fallback():
    env = dict(os.environ, FRACLAP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from fraclap.kernels import BACKEND; print(BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
