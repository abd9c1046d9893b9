"""Scaled cutoff test functions and the integrals they control.

For horizon ``T`` and dilation ``B`` the pair is

    phi1(x) = Phi(|x| / R),   R = (B T)^alpha,      phi2(t) = Phi(t / T),

and the two right-hand-side integrals are

    I1 = int_0^T int phi2^eta phi1^(ell - r) |(-Delta)^{beta/2} phi1|^r dx dt,   r = q/(q-p)
    I2 = int_0^T int phi1^ell phi2^(eta - qt) |phi2'|^qt dx dt,                  qt = q/(q-1)

Both factor into a space integral times a time integral.  The spatial grid
follows ``R`` (fixed number of cells across the cutoff annulus), so every
``T`` is resolved equally well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import quad

from fraclap.bump import bump_derivative, bump_profile
from fraclap.exponents import ExponentParams, alpha as alpha_exp, conjugate, delta, is_critical, q_star
from fraclap.grid import Descriptor, Field, GridSpec, integrate, make_grid, sample
from fraclap.operators import spectral_frac_lap

CELLS_PER_RADIUS = 128
MIN_CELLS_PER_RADIUS = 64
TIME_NODES = 1024


def build_bump():
    """The cutoff Phi: 1 on [0, 1/2], 0 on [1, inf), smooth and non-increasing."""
    return bump_profile


def default_power(p: float, q: float) -> int:
    """Default ell = eta: comfortably above both q/(q-p) and q/(q-1)."""
    r = max(q / (q - p), conjugate(q))
    return max(4, math.ceil(2 * r) + 1)


@dataclass(frozen=True)
class CutoffSpec:
    ell: int = 4
    eta: int = 4

    def __post_init__(self) -> None:
        if self.ell < 2 or self.eta < 2:
            raise ValueError("ell and eta must be at least 2")

    @classmethod
    def for_exponents(cls, p: float, q: float) -> CutoffSpec:
        k = default_power(p, q)
        return cls(k, k)

    def check(self, p: float, q: float) -> None:
        if not self.ell > q / (q - p):
            raise ValueError(f"ell={self.ell} must exceed q/(q-p)={q / (q - p):.6g}")
        if not self.eta > conjugate(q):
            raise ValueError(f"eta={self.eta} must exceed q/(q-1)={conjugate(q):.6g}")


@dataclass(frozen=True)
class TestFunctionPair:
    T: float
    alpha: float
    dim: int = 1
    B: float = 1.0
    cutoff: CutoffSpec = field(default_factory=CutoffSpec)
    box_factor: float = 2.0
    cells_per_radius: int = CELLS_PER_RADIUS

    __test__ = False  # not a pytest class

    def __post_init__(self) -> None:
        if not self.T > 1:
            raise ValueError("horizon T must exceed 1")
        if not self.B >= 1:
            raise ValueError("dilation B must be >= 1")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.box_factor >= 1:
            raise ValueError("the box must contain the support")

    @property
    def support_radius(self) -> float:
        return (self.B * self.T) ** self.alpha

    @cached_property
    def grid(self) -> GridSpec:
        n = 1 << max(4, math.ceil(math.log2(2 * self.box_factor * self.cells_per_radius)))
        return make_grid(self.dim, n, self.box_factor * self.support_radius)

    def phi1(self, grid: GridSpec | None = None) -> Field:
        g = grid or self.grid
        return Field(g, bump_profile(g.radius / self.support_radius))

    def phi2(self, t):
        return bump_profile(np.asarray(t, dtype=np.float64) / self.T)

    def dphi2(self, t):
        return bump_derivative(np.asarray(t, dtype=np.float64) / self.T) / self.T


def make_pair(params: ExponentParams, T: float, B: float = 1.0, cutoff: CutoffSpec | None = None, **kw) -> TestFunctionPair:
    a = float(alpha_exp(params.p, params.q, params.beta))
    cutoff = cutoff or CutoffSpec.for_exponents(float(params.p), float(params.q))
    return TestFunctionPair(float(T), a, int(params.N), float(B), cutoff, **kw)


def _time_integral(pair: TestFunctionPair, fn, nodes: int) -> float:
    # midpoint rule in s = t/T
    s = (np.arange(nodes) + 0.5) / nodes
    return pair.T * float(np.mean(fn(s * pair.T)))


def _check_resolution(pair: TestFunctionPair, grid: GridSpec) -> None:
    if grid.spacing > pair.support_radius / MIN_CELLS_PER_RADIUS:
        raise ValueError(
            f"under-resolved annulus: spacing {grid.spacing:.4g} > support radius/{MIN_CELLS_PER_RADIUS}"
        )


def rhs_integrals(pair: TestFunctionPair, p: float, q: float, beta: float,
                  time_nodes: int = TIME_NODES) -> tuple[float, float]:
    """The two integrals bounding ``int int |u|^q phi`` (spectral fractional Laplacian)."""
    if not q > p or not q > 1:
        raise ValueError("need p < q and q > 1")
    if time_nodes < 256:
        raise ValueError("use at least 256 time nodes")
    pair.cutoff.check(p, q)
    grid = pair.grid
    _check_resolution(pair, grid)
    ell, eta = pair.cutoff.ell, pair.cutoff.eta
    r, qt = q / (q - p), conjugate(q)

    phi1 = pair.phi1(grid)
    lap = np.abs(spectral_frac_lap(phi1, beta).values)
    space1 = integrate(phi1.values ** (ell - r) * lap**r, grid)
    time1 = _time_integral(pair, lambda t: pair.phi2(t) ** eta, time_nodes)

    space2 = integrate(phi1.values**ell, grid)
    time2 = _time_integral(pair, lambda t: pair.phi2(t) ** (eta - qt) * np.abs(pair.dphi2(t)) ** qt, time_nodes)
    return space1 * time1, space2 * time2


def lower_bound_integral(u0, pair: TestFunctionPair, grid: GridSpec | None = None) -> float:
    """``int u0 phi1^ell dx`` for slowly decaying data ``eps (1+|x|^2)^{-gamma/2}``.

    Descriptor data without an explicit grid is integrated radially, which
    resolves both the unit-width core of ``u0`` and the cutoff at radius R;
    a Field (or an explicit grid) uses the rectangle rule on that grid.
    """
    if isinstance(u0, Field):
        vals, g = u0.values, u0.grid
    else:
        d = Descriptor.parse(u0) if isinstance(u0, str) else u0
        if d.family != "algebraic_decay":
            raise ValueError("the lower bound is stated for algebraic_decay data")
        eps, gam = d.params
        if not gam < pair.dim:
            raise ValueError(f"gamma={gam} must be < N={pair.dim}: the growth law changes")
        if grid is None:
            return _radial_lower_bound(eps, gam, pair)
        g = grid
        vals = sample(d, g).values
    if g.L < pair.support_radius:
        raise ValueError("grid box does not contain the cutoff support")
    return integrate(vals * pair.phi1(g).values ** pair.cutoff.ell, g)


def _radial_lower_bound(eps: float, gam: float, pair: TestFunctionPair) -> float:
    R, N, ell = pair.support_radius, pair.dim, pair.cutoff.ell
    sphere = 2.0 if N == 1 else 2.0 * math.pi  # |S^{N-1}|

    def integrand(r):
        return r ** (N - 1) * (1.0 + r * r) ** (-gam / 2.0) * float(bump_profile(r / R)) ** ell

    cuts = sorted({0.0, min(1.0, R / 2), R / 2, R})
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        val, _ = quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return eps * sphere * total


def case2_terms(pair_B: TestFunctionPair, p: float, q: float, beta: float, tail_mass: float) -> tuple[float, float]:
    """Critical-case bound: I1 at dilation B, and ``B^{N alpha / qt} tail_mass^{1/q}``."""
    if not is_critical(q, q_star(p, beta, pair_B.dim)):
        raise ValueError(f"q={q} is not critical (q*={q_star(p, beta, pair_B.dim)})")
    if tail_mass < 0:
        raise ValueError("tail mass must be nonnegative")
    term1, _ = rhs_integrals(pair_B, p, q, beta)
    term2 = (pair_B.B ** (pair_B.dim * pair_B.alpha)) ** (1.0 / conjugate(q)) * tail_mass ** (1.0 / q)
    return term1, term2


# {{{ log-log fitting


def fit_loglog(x, y) -> tuple[float, float]:
    """Least-squares slope and intercept of log y against log x."""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if len(x) < 4:
        raise ValueError("a scaling fit needs at least 4 points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("a log-log fit needs positive data")
    if np.max(x) / np.min(x) < 4.0 * (1 - 1e-12):
        raise ValueError("the abscissae must span at least two octaves")
    lx, ly = np.log(x), np.log(y)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    return float(slope), float(intercept)


def log_model_slope(x, y) -> float:
    """Log-log slope of the best fit ``y ~ a + b log x`` (logarithmic growth model)."""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    A = np.stack([np.ones_like(x), np.log(x)], axis=1)
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    return fit_loglog(x, a + b * np.log(x))[0]


@dataclass
class ScalingReport:
    T_values: list[float]
    I1_values: list[float] = field(default_factory=list)
    I2_values: list[float] = field(default_factory=list)
    lower_bound_values: list[float] = field(default_factory=list)
    B_values: list[float] = field(default_factory=list)
    fitted_slopes: dict[str, float] = field(default_factory=dict)
    intercepts: dict[str, float] = field(default_factory=dict)
    predicted: dict[str, float] = field(default_factory=dict)
    flags: dict[str, str] = field(default_factory=dict)


def scaling_fit(T_values, series: dict[str, list[float]], predicted: dict[str, float] | None = None) -> ScalingReport:
    """Fit every non-empty series against ``T_values``; series named I1, I2, lower_bound, I."""
    rep = ScalingReport([float(t) for t in T_values], predicted=dict(predicted or {}))
    for name, vals in series.items():
        if not len(vals):
            continue
        if len(vals) != len(T_values):
            raise ValueError(f"series {name} has {len(vals)} values for {len(T_values)} abscissae")
        attr = f"{name}_values"
        if hasattr(rep, attr):
            setattr(rep, attr, [float(v) for v in vals])
        rep.fitted_slopes[name], rep.intercepts[name] = fit_loglog(T_values, vals)
    return rep


# }}}


def scaling_study(params: ExponentParams, T_values, B_values=(1.0,), cutoff: CutoffSpec | None = None) -> tuple[list[dict], ScalingReport]:
    """Rows (one per T, B) of I1, I2 and the lower bound, plus fits over T at B = 1."""
    p, q, b, N = float(params.p), float(params.q), float(params.beta), int(params.N)
    d = float(delta(params))
    growth = None
    u0 = None
    if params.gamma is not None:
        growth = float(alpha_exp(params.p, params.q, params.beta)) * (N - float(params.gamma))
        u0 = Descriptor("algebraic_decay", (float(params.epsilon or 1.0), float(params.gamma)))
    rows = []
    for B in B_values:
        for T in T_values:
            pair = make_pair(params, T, B, cutoff)
            i1, i2 = rhs_integrals(pair, p, q, b)
            lb = lower_bound_integral(u0, pair) if u0 is not None else None
            rows.append({"T": float(T), "B": float(B), "I1": i1, "I2": i2, "lower_bound": lb,
                         "predicted_delta": d, "predicted_growth": growth})
    base = [r for r in rows if r["B"] == float(B_values[0])]
    series = {"I": [r["I1"] + r["I2"] for r in base], "I1": [r["I1"] for r in base], "I2": [r["I2"] for r in base]}
    predicted = {"I": -d, "I1": -d, "I2": -d}
    if u0 is not None:
        series["lower_bound"] = [r["lower_bound"] for r in base]
        predicted["lower_bound"] = growth
    fit = scaling_fit([r["T"] for r in base], series, predicted) if len(base) >= 4 else ScalingReport(list(T_values))
    fit.B_values = [float(v) for v in B_values]
    return rows, fit
