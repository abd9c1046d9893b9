from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import zeta

from fraclap.grid import Field, make_grid, sample
from fraclap.operators import (
    OperatorSpec,
    calibrate_constant,
    calibrated,
    frac_lap,
    normalization_constant,
    periodic_kernel,
    singular_frac_lap,
    singular_frac_lap_dense,
    spectral_frac_lap,
    standard_constant,
)


def relinf(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


# {{{ spectral backend


@pytest.mark.parametrize("dim, modes", [(1, (3,)), (1, (64,)), (2, (2, 5)), (2, (0, 7))])
@pytest.mark.parametrize("beta", [0.0, 0.3, 1.0, 1.7, 2.0])
def test_plane_wave_eigenfunction(dim, modes, beta):
    g = make_grid(dim, 128, 6.0)
    f = sample("plane_wave:" + ",".join(map(str, modes[:dim])), g)
    k = math.pi / g.L * math.sqrt(sum(m * m for m in modes[:dim]))
    out = spectral_frac_lap(f, beta).values
    assert np.max(np.abs(out - k**beta * f.values)) <= 1e-12 * max(1.0, k**beta)


def test_beta_two_gaussian_is_minus_laplacian():
    for dim, n in ((1, 512), (2, 256)):
        g = make_grid(dim, n, 12.0)
        r2 = g.radius**2
        out = spectral_frac_lap(sample("gaussian:1,1", g), 2.0).values
        assert np.max(np.abs(out - (dim - r2) * np.exp(-r2 / 2))) <= 1e-8


def test_beta_zero_is_identity_and_mean_kept():
    g = make_grid(1, 64, 3.0)
    f = sample("constant:2.5", g)
    assert np.array_equal(spectral_frac_lap(f, 0.0).values, f.values)
    assert np.max(np.abs(spectral_frac_lap(f, 0.5).values)) < 1e-14


def test_periodised_lorentzian_closed_form():
    # sqrt(-Delta) of the periodised Poisson kernel is minus its time derivative
    L = 40.0
    P = 2 * L
    a = 2 * math.pi / P
    g = make_grid(1, 2048, L)
    x = g.axis
    f = (math.pi / P) * math.sinh(a) / (math.cosh(a) - np.cos(a * x))
    expect = -math.pi * (a / P) * (1 - math.cosh(a) * np.cos(a * x)) / (math.cosh(a) - np.cos(a * x)) ** 2
    out = spectral_frac_lap(Field(g, f), 1.0).values
    assert np.max(np.abs(out - expect)) <= 1e-10


def test_lorentzian_truncation_error_is_order_L_minus_two():
    errs = []
    for L in (40.0, 80.0, 160.0):
        g = make_grid(1, int(2048 * L / 40), L)
        x = g.axis
        out = spectral_frac_lap(Field(g, 1 / (1 + x * x)), 1.0).values
        m = np.abs(x) <= 5
        errs.append(np.max(np.abs(out[m] - ((1 - x * x) / (1 + x * x) ** 2)[m])))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(0, 1000))
def test_semigroup_additivity(b1, b2, seed):
    g = make_grid(1, 64, 4.0)
    f = sample("gaussian:1,0.7", g)
    two = spectral_frac_lap(spectral_frac_lap(f, b1), b2).values
    one = spectral_frac_lap(f, b1 + b2).values
    assert np.linalg.norm(two - one) <= 1e-10 * max(np.linalg.norm(one), 1e-300)


@pytest.mark.parametrize("backend", ["spectral", "singular_integral"])
def test_symmetry(backend):
    g = make_grid(1, 256, 10.0)
    f, h = sample("gaussian:1,1", g), sample("gaussian:0.5,1.5,1.0", g)
    spec = OperatorSpec(0.8, backend)
    lhs = float(np.vdot(frac_lap(f, spec).values, h.values))
    rhs = float(np.vdot(f.values, frac_lap(h, spec).values))
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


@pytest.mark.parametrize("backend", ["spectral", "singular_integral"])
@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
def test_positive_at_strict_maximum(backend, beta):
    g = make_grid(1, 256, 10.0)
    f = sample("gaussian:1,1", g)
    out = frac_lap(f, OperatorSpec(beta, backend)).values
    assert out[int(np.argmax(f.values))] > 1e-10


def test_beta_out_of_range():
    g = make_grid(1, 16, 1.0)
    with pytest.raises(ValueError, match="beta"):
        spectral_frac_lap(sample("constant:1", g), 2.5)
    with pytest.raises(ValueError, match="beta"):
        OperatorSpec(2.0, "singular_integral")
    with pytest.raises(ValueError, match="backend"):
        OperatorSpec(1.0, "fem")


# }}}


# {{{ constants


def test_normalization_constant_examples():
    assert normalization_constant(1, 1.0) == pytest.approx(2 / math.pi, rel=1e-14)
    assert normalization_constant(2, 1.0) == pytest.approx(1 / math.pi, rel=1e-14)
    assert math.isfinite(normalization_constant(1, 1.999))
    for bad in (0.0, 2.0, 2.5):
        with pytest.raises(ValueError):
            normalization_constant(1, bad)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("beta", [0.1, 0.5, 1.0, 1.5, 1.9])
def test_gamma_recurrence_ratio(N, beta):
    assert standard_constant(N, beta) / normalization_constant(N, beta) == pytest.approx(beta / 2, rel=1e-13)


# }}}


# {{{ singular backend


def test_periodic_kernel_matches_hurwitz_images():
    z = np.array([0.3, 1.7, 5.0])
    P, b = 8.0, 0.6
    s = 1 + b
    direct = sum(np.abs(z + m * P) ** (-s) for m in range(-20000, 20001))
    tail = 2 * (20000.5 * P) ** (-b) / (b * P)
    K = periodic_kernel(z[:, None], b, P, 1)
    assert np.allclose(K, direct + tail, rtol=1e-7)
    assert np.allclose(K, P**-s * (zeta(s, z / P) + zeta(s, 1 - z / P)), rtol=1e-13)


def test_periodic_kernel_2d_against_large_image_block():
    z = np.array([[0.5, 0.0], [1.0, 2.0], [3.9, -3.9]])
    P, b = 8.0, 1.0
    M = 150
    m = np.arange(-M, M + 1) * P
    d0 = z[:, 0, None, None] + m[None, :, None]
    d1 = z[:, 1, None, None] + m[None, None, :]
    direct = np.sum((d0**2 + d1**2) ** (-(2 + b) / 2), axis=(1, 2))
    tail = 2 * math.pi * ((2 * M + 1) * P / math.sqrt(math.pi)) ** -b / (b * P * P)
    # four shells plus a continuum tail: second-order accurate in the shell count
    assert np.allclose(periodic_kernel(z, b, P, 2), direct + tail, rtol=1e-3)


@pytest.mark.parametrize("dim", [1, 2])
def test_constant_in_kernel(dim):
    g = make_grid(dim, 64 if dim == 2 else 256, 8.0)
    out = singular_frac_lap(sample("constant:3", g), OperatorSpec(1.2, "singular_integral")).values
    assert np.max(np.abs(out)) <= 1e-8


def test_translation_equivariance():
    g = make_grid(1, 256, 10.0)
    spec = OperatorSpec(1.3, "singular_integral")
    f = sample("gaussian:1,1", g)
    shift = 17
    a = singular_frac_lap(Field(g, np.roll(f.values, shift)), spec).values
    b = np.roll(singular_frac_lap(f, spec).values, shift)
    assert np.max(np.abs(a - b)) <= 1e-10


def test_plane_wave_singular_eigenfunction():
    g = make_grid(1, 512, 10.0)
    spec = calibrated(OperatorSpec(1.0, "singular_integral"), g)
    f = sample("plane_wave:4", g)
    out = singular_frac_lap(f, spec).values
    k = 4 * math.pi / g.L
    assert np.max(np.abs(out - k * f.values)) <= 1e-4 * k


def test_grid_too_coarse():
    g = make_grid(1, 64, 10.0)
    with pytest.raises(ValueError, match="too coarse"):
        singular_frac_lap(sample("gaussian:1,1", g), OperatorSpec(1.0, "singular_integral", cutoff_radius=0.1))


@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
def test_calibration_factor_is_half_beta(beta):
    g = make_grid(1, 2048, 40.0)
    lam = calibrate_constant(1, beta, g)
    assert lam == pytest.approx(beta / 2, rel=0.02)


def test_calibration_near_two():
    lam = calibrate_constant(1, 1.9, make_grid(1, 2048, 40.0))
    assert lam == pytest.approx(0.95, rel=0.05)


def test_calibration_degenerate():
    with pytest.raises(ValueError, match="degenerate"):
        calibrate_constant(1, 1.0, make_grid(1, 256, 10.0), reference="constant:1")
    with pytest.raises(ValueError, match="dimension"):
        calibrate_constant(2, 1.0, make_grid(1, 256, 10.0))


def test_cross_backend_gaussian_1d():
    g = make_grid(1, 2048, 40.0)
    f = sample("gaussian:1,1", g)
    spec = calibrated(OperatorSpec(1.0, "singular_integral"), g)
    assert relinf(singular_frac_lap(f, spec).values, spectral_frac_lap(f, 1.0).values) <= 1e-3


def test_cross_backend_gaussian_2d():
    g = make_grid(2, 64, 8.0)
    f = sample("gaussian:1,1", g)
    spec = calibrated(OperatorSpec(1.0, "singular_integral"), g)
    assert relinf(singular_frac_lap(f, spec).values, spectral_frac_lap(f, 1.0).values) <= 1e-3


def test_dense_oracle_agrees_with_coarse():
    g = make_grid(1, 256, 10.0)
    spec = OperatorSpec(1.0, "singular_integral", calibration_factor=0.5)
    coarse = singular_frac_lap(sample("gaussian:1,1", g), spec).values
    dense = singular_frac_lap_dense("gaussian:1,1", g, spec).values
    assert relinf(coarse, dense) <= 1e-3


def test_no_regularization_is_worse():
    g = make_grid(1, 512, 20.0)
    f = sample("gaussian:1,1", g)
    truth = spectral_frac_lap(f, 1.5).values
    errs = {}
    for reg in ("taylor-window", "none"):
        spec = calibrated(OperatorSpec(1.5, "singular_integral", inner_regularization=reg), g)
        errs[reg] = relinf(singular_frac_lap(f, spec).values, truth)
    assert errs["taylor-window"] < errs["none"]


# }}}
