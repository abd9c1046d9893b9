"""Periodic grids, sampled fields and their discrete Fourier duals.

Everything numerical in the package is computed on a uniform periodic
sampling of the box ``[-L, L)^N`` with ``N`` in {1, 2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from fraclap.bump import bump_profile

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[-L, L)^dim`` with ``n`` points per axis."""

    dim: int
    n: int
    L: float

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"invalid dimension {self.dim!r}: only N in {{1, 2}} is supported")
        if not isinstance(self.n, (int, np.integer)) or self.n < 16 or self.n & (self.n - 1):
            raise ValueError(f"points per axis must be a power of two >= 16, got {self.n!r}")
        if not self.L > 0 or not math.isfinite(self.L):
            raise ValueError(f"box half-width must be positive, got {self.L!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "L", float(self.L))

    @property
    def spacing(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        """Sample coordinates along one axis, ``-L + j*h``."""
        return -self.L + self.spacing * np.arange(self.n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.dim), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        """Euclidean distance of every sample from the origin."""
        return np.sqrt(sum(c * c for c in self.coords))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Per-axis wavenumbers ``pi*k/L`` in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n) * (math.pi / self.L)

    @cached_property
    def kvec(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.wavenumbers] * self.dim), indexing="ij"))

    @cached_property
    def kmag(self) -> np.ndarray:
        """Euclidean wavenumber magnitude on the full spectral lattice."""
        return np.sqrt(sum(k * k for k in self.kvec))

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean mask keeping modes with ``|index| <= n/3`` on every axis."""
        idx = np.abs(np.fft.fftfreq(self.n, d=1.0 / self.n))
        keep = idx <= self.n / 3.0
        mask = keep
        for _ in range(self.dim - 1):
            mask = np.multiply.outer(mask, keep)
        return mask


def make_grid(dim: int, n: int, L: float) -> GridSpec:
    """Validated grid constructor; see :class:`GridSpec`."""
    grid = GridSpec(dim, n, L)
    # touch the lattice so concurrent readers never race on the first build
    grid.kmag
    return grid


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a function on a :class:`GridSpec`.

    ``diverged`` marks a field produced by a blown-up computation; only
    such fields may hold non-finite values.
    """

    grid: GridSpec
    values: np.ndarray
    diverged: bool = False
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != self.grid.shape:
            if vals.size != self.grid.size:
                raise ValueError(f"values of shape {vals.shape} do not fit grid {self.grid.shape}")
            vals = vals.reshape(self.grid.shape)
        if not self.diverged and not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values, **kw) -> Field:
        return Field(self.grid, values, **kw)

    def __neg__(self) -> Field:
        return self.with_values(-self.values)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Unnormalised DFT coefficients (numpy ``fftn`` convention)."""

    grid: GridSpec
    coefficients: np.ndarray


def to_spectrum(f: Field) -> Spectrum:
    if f.diverged or not np.all(np.isfinite(f.values)):
        raise ValueError("cannot transform a non-finite field")
    return Spectrum(f.grid, np.fft.fftn(f.values))


def from_spectrum(s: Spectrum) -> Field:
    return Field(s.grid, np.fft.ifftn(s.coefficients).real)


def integrate(f: Field | np.ndarray, grid: GridSpec | None = None) -> float:
    """Rectangle-rule integral over the box."""
    if isinstance(f, Field):
        grid, vals = f.grid, f.values
    else:
        vals = f
    return float(np.sum(vals) * grid.cell_volume)


def lp_norm(f: Field, p: float) -> float:
    if p <= 0:
        raise ValueError("Lp norm needs p > 0")
    a = np.abs(f.values)
    return integrate(a**p, f.grid) ** (1.0 / p)


def norms(f: Field, q: float | None = None) -> dict[str, float]:
    """sup, L1, L2 (and Lq if ``q`` is given) by the rectangle rule."""
    if not np.all(np.isfinite(f.values)):
        raise ValueError("norms of a non-finite field are undefined")
    out = {
        "sup": float(np.max(np.abs(f.values))),
        "L1": lp_norm(f, 1.0),
        "L2": lp_norm(f, 2.0),
    }
    if q is not None:
        out["Lq"] = lp_norm(f, q)
    return out


# {{{ built-in function families

FAMILIES = {
    # name: (min params, max params, periodic by construction)
    "gaussian": (2, 4, False),
    "algebraic_decay": (2, 2, False),
    "plane_wave": (1, 2, True),
    "bump": (0, 1, False),
    "constant": (1, 1, True),
}


@dataclass(frozen=True)
class Descriptor:
    """Names a built-in function family and its parameters.

    ``gaussian:a,w[,c1[,c2]]``   a*exp(-|x-c|^2/(2 w^2))
    ``algebraic_decay:eps,gamma`` eps*(1+|x|^2)^(-gamma/2)
    ``plane_wave:m1[,m2]``        cos(k.x) with k = pi*m/L
    ``bump[:radius]``             smooth cutoff Phi(|x|/radius), radius default L/2
    ``constant:c``
    """

    family: str
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown descriptor family {self.family!r}")
        lo, hi, _ = FAMILIES[self.family]
        if not lo <= len(self.params) <= hi:
            raise ValueError(f"{self.family} takes {lo}..{hi} parameters, got {len(self.params)}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))

    @classmethod
    def parse(cls, text: str) -> Descriptor:
        name, _, rest = text.strip().partition(":")
        name = {"algdecay": "algebraic_decay"}.get(name, name)
        params = tuple(float(v) for v in rest.split(",") if v.strip()) if rest else ()
        return cls(name, params)

    def __str__(self) -> str:
        if not self.params:
            return self.family
        return self.family + ":" + ",".join(repr(v) for v in self.params)


def _evaluate(d: Descriptor, grid: GridSpec) -> np.ndarray:
    x = grid.coords
    fam, par = d.family, d.params
    if fam == "gaussian":
        amp, width = par[0], par[1]
        if width <= 0:
            raise ValueError("gaussian width must be positive")
        center = list(par[2:]) + [0.0] * (grid.dim - len(par[2:]))
        r2 = sum((xi - ci) ** 2 for xi, ci in zip(x, center))
        return amp * np.exp(-r2 / (2.0 * width * width))
    if fam == "algebraic_decay":
        eps, gamma = par
        if eps < 0 or gamma <= 0:
            raise ValueError("algebraic_decay needs eps >= 0 and gamma > 0")
        return eps * (1.0 + grid.radius**2) ** (-gamma / 2.0)
    if fam == "plane_wave":
        modes = list(par) + [0.0] * (grid.dim - len(par))
        if len(par) > grid.dim or any(m != int(m) or abs(m) > grid.n // 2 for m in modes):
            raise ValueError("plane_wave modes must be integers resolvable on the grid")
        phase = sum(math.pi * m / grid.L * xi for m, xi in zip(modes, x))
        return np.cos(phase)
    if fam == "bump":
        radius = par[0] if par else grid.L / 2.0
        if radius <= 0:
            raise ValueError("bump radius must be positive")
        return bump_profile(grid.radius / radius)
    if fam == "constant":
        return np.full(grid.shape, par[0])
    raise AssertionError(fam)


def sample(descriptor: Descriptor | str, grid: GridSpec) -> Field:
    """Evaluate a built-in family on the grid.

    Families that are not periodic by construction get a truncation
    warning when they exceed ``1e-12`` (relative to their sup) on the box
    boundary.
    """
    d = Descriptor.parse(descriptor) if isinstance(descriptor, str) else descriptor
    vals = _evaluate(d, grid)
    warns: tuple[str, ...] = ()
    if not FAMILIES[d.family][2]:
        edge = boundary_max(vals)
        scale = float(np.max(np.abs(vals))) or 1.0
        if edge > BOUNDARY_TOL * scale:
            warns = (f"truncation: |{d}| reaches {edge:.3e} on the box boundary",)
    return Field(grid, vals, warnings=warns)


def boundary_max(vals: np.ndarray) -> float:
    """Largest magnitude on the ``x_i = -L`` faces (the periodic seam)."""
    return max(float(np.max(np.abs(np.take(vals, 0, axis=ax)))) for ax in range(vals.ndim))

# }}}
