"""Numerical checks of Ju's pointwise inequality

    (-Delta)^{delta/2} psi^q  <=  q psi^{q-1} (-Delta)^{delta/2} psi

for nonnegative smooth psi, q >= 1, 0 <= delta <= 2, and of the Young step
behind its proof.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from fraclap.grid import Field, GridSpec, make_grid
from fraclap.operators import OperatorSpec, frac_lap, spectral_frac_lap


@dataclass(frozen=True)
class JuCase:
    psi: Field
    q: float
    delta: float
    backend: str = "spectral"

    def __post_init__(self) -> None:
        if np.min(self.psi.values) < 0:
            raise ValueError("psi must be nonnegative")
        if not self.q >= 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if not 0 <= self.delta <= 2:
            raise ValueError(f"delta must lie in [0, 2], got {self.delta}")


def _op(f: Field, delta: float, backend: str) -> Field:
    # the endpoints are the identity and the classical Laplacian on either backend
    if backend == "spectral" or delta in (0.0, 2.0):
        return spectral_frac_lap(f, delta)
    return frac_lap(f, OperatorSpec(delta, backend))


def ju_gap(case: JuCase) -> tuple[Field, float]:
    """Pointwise gap ``q psi^{q-1} Op(psi) - Op(psi^q)`` and ``max(0, -min gap)``."""
    psi, q = case.psi, float(case.q)
    if q == 1.0:
        # psi^0 = 1 everywhere, including where psi vanishes
        weight = np.ones_like(psi.values)
        powered = psi
    else:
        weight = q * psi.values ** (q - 1.0)
        powered = psi.with_values(psi.values**q)
    gap = weight * _op(psi, case.delta, case.backend).values - _op(powered, case.delta, case.backend).values
    return psi.with_values(gap), max(0.0, -float(np.min(gap)))


def young_step_check(psi, q: float, sample_pairs) -> float:
    """Largest excess of ``a^{q-1} b`` over ``(q-1)/q a^q + b^q/q`` over index pairs.

    ``psi`` is a Field or array; ``sample_pairs`` an (m, 2) array of flat
    indices ``(x, x+z)``.
    """
    if not q > 1:
        raise ValueError(f"the Young step needs q > 1, got {q}")
    vals = np.ravel(psi.values if isinstance(psi, Field) else psi)
    if np.min(vals) < 0:
        raise ValueError("psi must be nonnegative")
    pairs = np.asarray(sample_pairs, dtype=np.intp).reshape(-1, 2)
    if not len(pairs):
        return 0.0
    a, b = vals[pairs[:, 0]], vals[pairs[:, 1]]
    # rhs - lhs = a^q g(b/a) with g(t) = (t^q - 1 - q (t - 1)) / q; the expm1/log1p form
    # avoids the cancellation of the direct difference near the equality case a = b
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(a > 0, b / np.where(a > 0, a, 1.0) - 1.0, 0.0)
        g = (np.expm1(q * np.log1p(d)) - q * d) / q
    slack = np.where(a > 0, a**q * g, b**q / q)
    return max(0.0, -float(np.min(slack)))


# {{{ random nonnegative test functions


@dataclass(frozen=True)
class RandomPositive:
    """Positive trigonometric polynomial on the box, resolution independent.

    ``psi = floor + sum|c_m| + sum c_m cos(k_m . x + phi_m)``, with every
    amplitude damped by the heat mollifier ``exp(-tau |k_m|^2)``; the offset
    keeps ``min psi >= floor > 0``.
    """

    L: float
    dim: int
    modes: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    floor: float

    @classmethod
    def draw(cls, rng: np.random.Generator, dim: int, L: float, max_mode: int = 6, terms: int = 6,
             floor: float = 0.25, tau: float = 0.05) -> RandomPositive:
        modes = rng.integers(-max_mode, max_mode + 1, size=(terms, dim))
        modes[np.all(modes == 0, axis=1), 0] = 1
        k2 = np.sum((np.pi * modes / L) ** 2, axis=1)
        amps = rng.normal(size=terms) * np.exp(-tau * k2)
        phases = rng.uniform(0, 2 * np.pi, size=terms)
        return cls(L, dim, modes, amps, phases, floor)

    def on(self, grid: GridSpec) -> Field:
        if grid.dim != self.dim or grid.L != self.L:
            raise ValueError("grid does not match the function's box")
        vals = np.full(grid.shape, self.floor + float(np.sum(np.abs(self.amplitudes))))
        for m, a, ph in zip(self.modes, self.amplitudes, self.phases):
            phase = sum(np.pi * mi / self.L * xi for mi, xi in zip(m, grid.coords))
            vals = vals + a * np.cos(phase + ph)
        return Field(grid, np.maximum(vals, 0.0))


# }}}


# {{{ sweeps


@dataclass(frozen=True)
class JuSuiteConfig:
    count: int = 100
    q_list: tuple[float, ...] = (1.0, 1.5, 2.0, 3.0)
    delta_list: tuple[float, ...] = (0.5, 1.0, 1.5)
    seed: int = 42
    dim: int = 1
    n: int = 1024
    L: float = 10.0
    backend: str = "spectral"
    tolerance: float = 1e-8
    refine: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if self.count < 1 or not self.q_list or not self.delta_list:
            raise ValueError("empty Ju suite")


@dataclass
class JuReport:
    config: dict
    cases: list[dict] = field(default_factory=list)
    aggregate_max_violation: float = 0.0
    aggregate_refined: float | None = None
    passed: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def suite_cases(cfg: JuSuiteConfig) -> list[tuple[int, float, float, RandomPositive]]:
    """Deterministic case list: q cycles fastest, then delta; one function draw per case."""
    rng = np.random.default_rng(cfg.seed)
    out = []
    nq, nd = len(cfg.q_list), len(cfg.delta_list)
    for i in range(cfg.count):
        q = cfg.q_list[i % nq]
        d = cfg.delta_list[(i // nq) % nd]
        out.append((i, float(q), float(d), RandomPositive.draw(rng, cfg.dim, cfg.L)))
    return out


def ju_sweep(cfg: JuSuiteConfig) -> JuReport:
    grid = make_grid(cfg.dim, cfg.n, cfg.L)
    fine = make_grid(cfg.dim, 2 * cfg.n, cfg.L) if cfg.refine else None
    cases = suite_cases(cfg)

    def run(case):
        i, q, d, fn = case
        _, v = ju_gap(JuCase(fn.on(grid), q, d, cfg.backend))
        row = {"index": i, "q": q, "delta": d, "max_violation": v}
        if fine is not None:
            row["max_violation_refined"] = ju_gap(JuCase(fn.on(fine), q, d, cfg.backend))[1]
        return row

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            rows = list(ex.map(run, cases))
    else:
        rows = [run(c) for c in cases]
    agg = max(r["max_violation"] for r in rows)
    agg_ref = max(r["max_violation_refined"] for r in rows) if fine is not None else None
    passed = agg <= cfg.tolerance and (agg_ref is None or agg_ref <= agg + 1e-12)
    return JuReport(asdict(cfg), rows, agg, agg_ref, passed)


# }}}
