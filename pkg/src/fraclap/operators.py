"""Fractional Laplacian ``(-Delta)^{beta/2}`` on the periodic box, two ways.

* ``spectral``: multiply the DFT by ``|k|^beta``.  This is the reference.
* ``singular_integral``: real-space quadrature of
  ``c * integral (psi(x) - psi(x+z)) / |z|^{N+beta} dz`` in symmetrised
  second-difference form, with the normalisation constant applied exactly
  as ``2^beta Gamma((N+beta)/2) / (pi^{N/2} Gamma(1-beta/2))`` and an
  optional calibration factor reconciling it with the multiplier.

The quadrature uses the periodised kernel, so both backends discretise the
same operator on the torus of side ``2L``.  Near ``z = 0`` the lattice sum is
corrected with the exact integral of a quadratic Taylor model of the second
difference, localised by a smooth window of radius ``cutoff_radius``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from fraclap import kernels
from fraclap.bump import bump_profile
from fraclap.grid import Field, GridSpec, sample

BACKENDS = ("spectral", "singular_integral")
REGULARIZATIONS = ("taylor-window", "none")

# 2-D periodic kernel: explicit image shells, continuum tail beyond them
IMAGE_SHELLS = 4


@dataclass(frozen=True)
class OperatorSpec:
    """Order, backend and quadrature settings for ``(-Delta)^{beta/2}``.

    ``cutoff_radius`` defaults to four grid spacings.
    """

    beta: float
    backend: str = "spectral"
    cutoff_radius: float | None = None
    inner_regularization: str = "taylor-window"
    calibration_factor: float = 1.0

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; choose from {BACKENDS}")
        if self.inner_regularization not in REGULARIZATIONS:
            raise ValueError(f"unknown inner regularization {self.inner_regularization!r}")
        if self.backend == "spectral":
            _check_beta(self.beta, closed=True)
        else:
            _check_beta(self.beta, closed=False)
        if not self.calibration_factor > 0:
            raise ValueError("calibration factor must be positive")

    def radius_for(self, grid: GridSpec) -> float:
        return self.cutoff_radius if self.cutoff_radius is not None else 4.0 * grid.spacing


@dataclass(frozen=True)
class SingularIntegralSpec:
    """Constant actually applied by the quadrature backend."""

    constant_cN: float
    dense_factor: int = 4


def _check_beta(beta: float, closed: bool) -> None:
    ok = 0.0 <= beta <= 2.0 if closed else 0.0 < beta < 2.0
    if not ok or not math.isfinite(beta):
        rng = "[0, 2]" if closed else "(0, 2)"
        raise ValueError(f"beta={beta!r} out of range {rng}")


# {{{ spectral backend


def spectral_multiplier(grid: GridSpec, beta: float) -> np.ndarray:
    """``|k|^beta`` on the ``rfftn`` half lattice (identity when beta = 0)."""
    _check_beta(beta, closed=True)
    return _rmultiplier(grid, float(beta))


@lru_cache(maxsize=64)
def _rmultiplier(grid: GridSpec, beta: float) -> np.ndarray:
    ks = [grid.wavenumbers] * (grid.dim - 1) + [np.abs(grid.wavenumbers[: grid.n // 2 + 1])]
    kk = np.meshgrid(*ks, indexing="ij")
    kmag = np.sqrt(sum(k * k for k in kk))
    mult = np.ones_like(kmag) if beta == 0 else kmag**beta
    mult.setflags(write=False)
    return mult


def apply_multiplier(values: np.ndarray, mult: np.ndarray) -> np.ndarray:
    axes = tuple(range(values.ndim))
    return np.fft.irfftn(np.fft.rfftn(values) * mult, s=values.shape, axes=axes)


def spectral_frac_lap(f: Field, beta: float) -> Field:
    """Fourier-multiplier fractional Laplacian; the k = 0 mode maps to 0 for beta > 0."""
    _check_beta(beta, closed=True)
    if beta == 0:
        return f.with_values(f.values)
    return f.with_values(apply_multiplier(f.values, spectral_multiplier(f.grid, beta)))


# }}}


# {{{ singular-integral backend


def normalization_constant(N: int, delta: float) -> float:
    """``2^delta Gamma((N+delta)/2) / (pi^{N/2} Gamma(1-delta/2))``, exactly as printed."""
    if N < 1:
        raise ValueError("dimension must be >= 1")
    _check_beta(delta, closed=False)
    return 2.0**delta * math.gamma((N + delta) / 2.0) / (math.pi ** (N / 2.0) * math.gamma(1.0 - delta / 2.0))


def standard_constant(N: int, delta: float) -> float:
    """``2^delta Gamma((N+delta)/2) / (pi^{N/2} |Gamma(-delta/2)|)``."""
    _check_beta(delta, closed=False)
    return 2.0**delta * math.gamma((N + delta) / 2.0) / (math.pi ** (N / 2.0) * abs(math.gamma(-delta / 2.0)))


def singular_spec(N: int, spec: OperatorSpec, dense_factor: int = 4) -> SingularIntegralSpec:
    return SingularIntegralSpec(normalization_constant(N, spec.beta) * spec.calibration_factor, dense_factor)


def periodic_kernel(z: np.ndarray, beta: float, period: float, dim: int) -> np.ndarray:
    """Image-summed kernel ``sum_m |z + P m|^{-dim-beta}`` for ``z`` of shape (m, dim)."""
    z = np.atleast_2d(z)
    s = dim + beta
    if dim == 1:
        t = np.abs(z[:, 0]) / period
        t = t - np.floor(t)
        return period**-s * (special.zeta(s, t) + special.zeta(s, 1.0 - t))
    M = IMAGE_SHELLS
    acc = np.zeros(len(z))
    for m0 in range(-M, M + 1):
        for m1 in range(-M, M + 1):
            d0 = z[:, 0] + period * m0
            d1 = z[:, 1] + period * m1
            acc += (d0 * d0 + d1 * d1) ** (-s / 2.0)
    # remaining images as a continuum over the exterior of the square block [-a, a]^2
    return acc + _square_exterior(beta, (M + 0.5) * period) / period**2


@lru_cache(maxsize=64)
def _square_exterior(beta: float, a: float) -> float:
    """``integral |x|^{-2-beta} dx`` over the plane minus the square of half-width ``a``."""
    ang, _ = integrate.quad(lambda th: math.cos(th) ** beta, 0.0, math.pi / 4.0, epsabs=0.0, epsrel=1e-13)
    return 8.0 * a**-beta * ang / beta


@dataclass(frozen=True)
class _Stencil:
    offsets: np.ndarray
    weights: np.ndarray
    window_defect: float


@lru_cache(maxsize=32)
def _stencil(grid: GridSpec, beta: float, radius: float, regularization: str) -> _Stencil:
    n, h, dim = grid.n, grid.spacing, grid.dim
    idx = np.arange(-n // 2, n // 2)
    lattice = np.stack([c.ravel() for c in np.meshgrid(*([idx] * dim), indexing="ij")], axis=1)
    lattice = lattice[np.any(lattice != 0, axis=1)]
    # one representative per {o, -o} pair; self-paired offsets carry half weight
    neg = (-lattice + n // 2) % n - n // 2
    self_paired = np.all(neg == lattice, axis=1)
    first = np.array([tuple(a) < tuple(b) for a, b in zip(lattice, neg)])
    keep = self_paired | first
    offsets = lattice[keep]
    z = offsets * h
    w = h**dim * periodic_kernel(z, beta, 2.0 * grid.L, dim)
    w[self_paired[keep]] *= 0.5

    defect = 0.0
    if regularization == "taylor-window":
        omega = 2.0 if dim == 1 else 2.0 * math.pi
        exact = omega * integrate.quad(
            lambda r: bump_profile(r / radius), 0.0, radius, weight="alg", wvar=(1.0 - beta, 0.0), limit=200
        )[0]
        r_all = np.sqrt(np.sum((lattice * h) ** 2, axis=1))
        lat = h**dim * np.sum(r_all ** (2.0 - dim - beta) * bump_profile(r_all / radius))
        defect = exact - lat
    offsets = np.ascontiguousarray(offsets, dtype=np.int_)
    offsets.setflags(write=False)
    w.setflags(write=False)
    return _Stencil(offsets, w, defect)


_FD6 = (-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0)


def fd_laplacian(values: np.ndarray, h: float) -> np.ndarray:
    """Sixth-order centred periodic finite-difference Laplacian."""
    out = np.zeros_like(values)
    for ax in range(values.ndim):
        acc = _FD6[0] * values
        for k in (1, 2, 3):
            acc = acc + _FD6[k] * (np.roll(values, k, axis=ax) + np.roll(values, -k, axis=ax))
        out += acc
    return out / (h * h)


def singular_sum(f: Field, spec: OperatorSpec) -> np.ndarray:
    """Quadrature of ``integral (psi(x) - psi(x+z)) K(z) dz`` without the constant."""
    grid = f.grid
    radius = spec.radius_for(grid)
    if grid.spacing > radius:
        raise ValueError(f"grid too coarse: spacing {grid.spacing:.4g} exceeds cutoff radius {radius:.4g}")
    st = _stencil(grid, float(spec.beta), float(radius), spec.inner_regularization)
    s = kernels.sym_difference_sum(f.values, st.offsets, st.weights)
    if st.window_defect:
        s = s - fd_laplacian(f.values, grid.spacing) * (st.window_defect / (2.0 * grid.dim))
    return s


def singular_frac_lap(f: Field, spec: OperatorSpec) -> Field:
    """Singular-integral fractional Laplacian scaled by the printed constant times calibration."""
    if spec.backend != "singular_integral":
        spec = replace(spec, backend="singular_integral")
    c = singular_spec(f.grid.dim, spec).constant_cN
    return f.with_values(c * singular_sum(f, spec))


def singular_frac_lap_dense(descriptor, grid: GridSpec, spec: OperatorSpec, dense_factor: int = 4) -> Field:
    """Oracle: evaluate the singular backend on a ``dense_factor``-times finer grid and restrict."""
    fine = GridSpec(grid.dim, grid.n * dense_factor, grid.L)
    out = singular_frac_lap(sample(descriptor, fine), spec)
    sl = (slice(None, None, dense_factor),) * grid.dim
    return Field(grid, out.values[sl])


# }}}


def frac_lap(f: Field, spec: OperatorSpec) -> Field:
    if spec.backend == "spectral":
        return spectral_frac_lap(f, spec.beta)
    return singular_frac_lap(f, spec)


def calibrate_constant(N: int, beta: float, grid: GridSpec, reference=None, **quad) -> float:
    """Least-squares factor lambda with ``lambda * singular ~ spectral`` on a reference Gaussian."""
    if grid.dim != N:
        raise ValueError(f"grid dimension {grid.dim} does not match N={N}")
    ref = sample(reference or "gaussian:1,1", grid)
    spec = OperatorSpec(beta, "singular_integral", **quad)
    uncal = singular_frac_lap(ref, spec).values
    truth = spectral_frac_lap(ref, beta).values
    denom = float(np.vdot(uncal, uncal))
    if denom <= 1e-300 or np.max(np.abs(uncal)) < 1e-12:
        raise ValueError("degenerate calibration: reference output is numerically zero")
    return float(np.vdot(uncal, truth)) / denom


def calibrated(spec: OperatorSpec, grid: GridSpec, reference=None) -> OperatorSpec:
    """Copy of ``spec`` on the singular backend carrying the measured calibration factor."""
    lam = calibrate_constant(
        grid.dim,
        spec.beta,
        grid,
        reference,
        cutoff_radius=spec.cutoff_radius,
        inner_regularization=spec.inner_regularization,
    )
    return replace(spec, backend="singular_integral", calibration_factor=lam)
