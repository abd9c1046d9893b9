"""Pseudospectral integration of ``u_t = -(-Delta)^{beta/2}(|u|^p) + |u|^q`` with blow-up detection.

Time stepping is the three-stage SSP Runge-Kutta scheme of Shu and Osher
with an adaptive step

    dt = cfl / (p sup|u|^{p-1} kmax^beta + q sup|u|^{q-1} + 1e-30),

where kmax is the largest retained wavenumber magnitude.  Blow-up is a
numerical verdict (threshold crossing, or step collapse with growth), never
a proof.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from fraclap.exponents import ExponentParams, Regime, classify, delta_star, q_star_star
from fraclap.grid import Descriptor, Field, GridSpec, boundary_max, from_spectrum, sample, to_spectrum
from fraclap.operators import spectral_multiplier

log = logging.getLogger(__name__)

# a state counts as resolved while the upper half of the retained band stays
# below this fraction of the largest Fourier amplitude
RESOLVED_TAIL = 1e-3


class Classification(str, Enum):
    BLOWUP = "blowup"
    DECAY = "decay"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class PDEParams:
    """Exponents of the equation; ``source=False`` drops ``|u|^q``.

    ``signed=True`` replaces ``|u|^p`` by ``u |u|^{p-1}`` (odd extension),
    which makes p = 1 exactly linear for sign-changing data.
    """

    p: float
    q: float
    beta: float
    N: int = 1
    gamma: float | None = None
    source: bool = True
    signed: bool = False

    def __post_init__(self) -> None:
        if not self.p > 0:
            raise ValueError("p must be positive")
        if self.source and not self.q > 1:
            raise ValueError("q must exceed 1")
        if not 0 < self.beta <= 2:
            raise ValueError("beta must lie in (0, 2]")

    def predicted_regime(self) -> Regime:
        if not self.source or not 0 < self.beta < 2 or not self.q > 1:
            return Regime.OUTSIDE
        try:
            return classify(ExponentParams(self.p, self.q, self.beta, self.N, self.gamma))
        except ValueError:
            return Regime.OUTSIDE


@dataclass(frozen=True)
class SimControls:
    t_max: float
    cfl: float = 0.4
    dt_min: float = 1e-10
    blowup_threshold: float = 1e6
    dealias: bool = True
    record_stride: int = 1
    max_steps: int = 5_000_000

    def __post_init__(self) -> None:
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if not 0 < self.dt_min < self.t_max:
            raise ValueError("need 0 < dt_min < t_max")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass
class SimState:
    u: np.ndarray
    t: float = 0.0
    dt: float = 0.0
    step_count: int = 0
    sup_history: list[tuple[float, float, float]] = field(default_factory=list)


@dataclass
class SimOutcome:
    classification: Classification
    t_final: float
    final_sup: float
    initial_sup: float
    steps: int
    predicted_regime: Regime
    t_blowup: float | None = None
    diverged: bool = False
    exploratory: bool = False
    reason: str = ""
    diagnostics: dict = field(default_factory=dict)
    history: list[tuple[float, float, float]] = field(default_factory=list)
    final: Field | None = None

    def to_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "predicted_regime": self.predicted_regime.value,
            "exploratory": self.exploratory,
            "t_final": self.t_final,
            "t_blowup": self.t_blowup,
            "final_sup": self.final_sup,
            "initial_sup": self.initial_sup,
            "steps": self.steps,
            "diverged": self.diverged,
            "reason": self.reason,
            "diagnostics": self.diagnostics,
        }


class Model:
    """Precomputed spectral data for one (grid, params, dealias) combination."""

    def __init__(self, grid: GridSpec, params: PDEParams, dealias: bool = True):
        if grid.dim != params.N:
            raise ValueError(f"grid dimension {grid.dim} does not match N={params.N}")
        self.grid, self.params, self.dealias = grid, params, dealias
        self.mult = spectral_multiplier(grid, params.beta)
        n = grid.n
        full = np.abs(np.fft.fftfreq(n, d=1.0 / n)) <= n / 3.0
        half = np.arange(n // 2 + 1) <= n / 3.0
        mask = half if grid.dim == 1 else np.multiply.outer(full, half)
        self.mask = mask if dealias else np.ones_like(mask)
        self.kmax = float(np.max(np.where(self.mask, self.mult ** (1.0 / params.beta), 0.0)))

    def _filter(self, w_hat: np.ndarray) -> np.ndarray:
        return w_hat * self.mask if self.dealias else w_hat

    def _power(self, u: np.ndarray, e: float, signed: bool) -> np.ndarray:
        a = np.abs(u)
        if e == 1.0:
            return u.copy() if signed else a
        return np.sign(u) * a**e if signed else a**e

    def rhs(self, u: np.ndarray) -> np.ndarray:
        shape, axes = u.shape, tuple(range(u.ndim))
        w = self._power(u, self.params.p, self.params.signed)
        out = -np.fft.irfftn(self._filter(np.fft.rfftn(w)) * self.mult, s=shape, axes=axes)
        if self.params.source:
            s = np.abs(u) ** self.params.q
            if self.dealias:
                s = np.fft.irfftn(self._filter(np.fft.rfftn(s)), s=shape, axes=axes)
            out += s
        return out

    def stable_dt(self, sup: float, cfl: float) -> float:
        p, q = self.params.p, self.params.q
        if sup == 0:
            # zero is a fixed point of the flow
            return math.inf
        rate = p * sup ** (p - 1.0) * self.kmax**self.params.beta
        if self.params.source:
            rate += q * sup ** (q - 1.0)
        return cfl / (rate + 1e-30)

    def tail_ratio(self, u: np.ndarray) -> float:
        """Largest amplitude in the upper half of the retained band over the largest overall."""
        a = np.abs(np.fft.rfftn(u))
        top = float(np.max(a))
        if top == 0:
            return 0.0
        n = self.grid.n
        band = n / 3.0 if self.dealias else n / 2.0
        idx = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        upper_full = idx > band / 2.0
        upper_half = np.arange(n // 2 + 1) > band / 2.0
        upper = upper_half if self.grid.dim == 1 else np.add.outer(upper_full, upper_half)
        return float(np.max(np.where(upper & self.mask, a, 0.0))) / top

    def ssp_rk3(self, u: np.ndarray, dt: float) -> np.ndarray:
        u1 = u + dt * self.rhs(u)
        u2 = 0.75 * u + 0.25 * (u1 + dt * self.rhs(u1))
        return u / 3.0 + (2.0 / 3.0) * (u2 + dt * self.rhs(u2))


def rhs(u: Field, p: float, q: float, beta: float, *, source: bool = True, signed: bool = False,
        dealias: bool = True) -> Field:
    """Right-hand side ``-(-Delta)^{beta/2}(|u|^p) + |u|^q`` on the field's grid."""
    m = Model(u.grid, PDEParams(p, q, beta, u.grid.dim, source=source, signed=signed), dealias)
    out = m.rhs(u.values)
    if not np.all(np.isfinite(out)):
        return u.with_values(out, diverged=True)
    return u.with_values(out)


def step(state: SimState, controls: SimControls, model: Model) -> SimState:
    """Advance one adaptive SSP-RK3 step in place; raises FloatingPointError on collapse."""
    sup = float(np.max(np.abs(state.u)))
    dt = model.stable_dt(sup, controls.cfl)
    if dt < controls.dt_min:
        raise FloatingPointError(f"step size {dt:.3e} below dt_min")
    dt = min(dt, controls.t_max - state.t)
    state.u = model.ssp_rk3(state.u, dt)
    state.t += dt
    state.dt = dt
    state.step_count += 1
    return state


def linear_exact(u0: Field, t: float, beta: float) -> Field:
    """Exact solution of ``u_t + (-Delta)^{beta/2} u = 0``: damp every mode by ``exp(-|k|^beta t)``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if not 0 <= beta <= 2:
        raise ValueError("beta must lie in [0, 2]")
    s = to_spectrum(u0)
    damp = np.exp(-(u0.grid.kmag**beta) * t) if beta > 0 else np.full(u0.grid.shape, math.exp(-t))
    return from_spectrum(type(s)(s.grid, s.coefficients * damp))


def _record(state: SimState, vol: float) -> None:
    sup = float(np.max(np.abs(state.u)))
    l2 = float(np.sqrt(np.sum(state.u * state.u) * vol))
    if not state.sup_history or state.t > state.sup_history[-1][0]:
        state.sup_history.append((state.t, sup, l2))


def run(u0: Field, params: PDEParams, controls: SimControls, *, probe: bool = True) -> SimOutcome:
    """Integrate until ``t_max``, blow-up or divergence, then classify."""
    if probe and np.min(u0.values) < 0:
        raise ValueError("theorem probes need u0 >= 0")
    model = Model(u0.grid, params, controls.dealias)
    vol = u0.grid.cell_volume
    state = SimState(np.array(u0.values, dtype=np.float64))
    _record(state, vol)
    sup0 = state.sup_history[0][1]
    if controls.blowup_threshold <= sup0:
        raise ValueError("blow-up threshold must exceed the initial sup norm")
    sups = [sup0]
    reason, diverged, collapsed = "t_max reached", False, False
    min_ratio = 0.0
    min_ratio_resolved = 0.0
    t_unresolved = None

    while state.t < controls.t_max:
        if state.step_count >= controls.max_steps:
            reason = "max_steps reached"
            break
        prev = state.u
        try:
            step(state, controls, model)
        except FloatingPointError as exc:
            reason, collapsed = str(exc), True
            break
        if not np.all(np.isfinite(state.u)):
            reason, diverged = "non-finite values", True
            state.u = prev
            break
        sup = float(np.max(np.abs(state.u)))
        sups.append(sup)
        if sup > 0:
            ratio = float(np.min(state.u)) / sup
            min_ratio = min(min_ratio, ratio)
            if t_unresolved is None:
                if model.tail_ratio(state.u) > RESOLVED_TAIL:
                    t_unresolved = state.t
                else:
                    min_ratio_resolved = min(min_ratio_resolved, ratio)
        if state.step_count % controls.record_stride == 0:
            _record(state, vol)
        if sup >= controls.blowup_threshold:
            reason = "sup norm crossed blow-up threshold"
            break
    _record(state, vol)

    final_sup = float(np.max(np.abs(state.u)))
    k = len(sups) - 1
    t_blowup = None
    if final_sup >= controls.blowup_threshold:
        cls = Classification.BLOWUP
        t_blowup = state.t
    elif collapsed and k >= 10 and sups[-1] >= 10.0 * sups[k // 10]:
        cls = Classification.BLOWUP
        t_blowup = state.t
    elif not diverged and state.t >= controls.t_max and _decayed(state.sup_history, sup0):
        cls = Classification.DECAY
    else:
        cls = Classification.UNDECIDED

    regime = params.predicted_regime()
    diagnostics = {
        "boundary_value_u0": boundary_max(u0.values),
        "min_over_sup": min_ratio,
        "min_over_sup_resolved": min_ratio_resolved,
        "t_unresolved": t_unresolved,
        "kmax": model.kmax,
        "last_dt": state.dt,
    }
    log.debug("run finished: %s at t=%.6g after %d steps (%s)", cls.value, state.t, state.step_count, reason)
    return SimOutcome(
        classification=cls,
        t_final=state.t,
        final_sup=final_sup,
        initial_sup=sup0,
        steps=state.step_count,
        predicted_regime=regime,
        t_blowup=t_blowup,
        diverged=diverged,
        exploratory=not regime.predicts_nonexistence,
        reason=reason,
        diagnostics=diagnostics,
        history=state.sup_history,
        final=u0.with_values(state.u, diverged=diverged or not np.all(np.isfinite(state.u))),
    )


def _decayed(history, sup0: float) -> bool:
    t_end, sup_end = history[-1][0], history[-1][1]
    if sup_end > 0.1 * sup0:
        return False
    tail = [s for t, s, _ in history if t >= 0.75 * t_end]
    return all(b <= a for a, b in zip(tail, tail[1:]))


def probe_theorem2(gamma: float, epsilon: float, params: PDEParams, controls: SimControls, grid: GridSpec) -> SimOutcome:
    """Run from ``epsilon (1+|x|^2)^{-gamma/2}`` and annotate with q** and delta*."""
    if not 0 < gamma < params.N:
        raise ValueError(f"gamma={gamma} violates 0 < gamma < N={params.N}")
    qss = q_star_star(params.p, params.beta, gamma)
    if not params.q < qss:
        raise ValueError(f"probe mode needs q < q** = {qss}")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    params = PDEParams(params.p, params.q, params.beta, params.N, gamma, params.source, params.signed)
    u0 = sample(Descriptor("algebraic_decay", (epsilon, gamma)), grid)
    out = run(u0, params, controls)
    ds = delta_star(ExponentParams(params.p, params.q, params.beta, params.N, gamma)) if params.q > params.p else None
    out.diagnostics.update({"q_star_star": qss, "delta_star": ds, "gamma": gamma, "epsilon": epsilon})
    return out
