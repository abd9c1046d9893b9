from __future__ import annotations

import math

import numpy as np
import pytest

from fraclap.grid import Field, make_grid, sample
from fraclap.simulate import (
    Classification,
    Model,
    PDEParams,
    SimControls,
    SimState,
    linear_exact,
    probe_theorem2,
    rhs,
    run,
    step,
)


def rel_l2(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


# {{{ right-hand side and single steps


def test_rhs_zero_and_constant():
    g = make_grid(1, 64, 5.0)
    assert np.all(rhs(sample("constant:0", g), 1.5, 2.0, 1.0).values == 0.0)
    out = rhs(sample("constant:1.3", g), 1.5, 2.5, 1.0).values
    assert np.allclose(out, 1.3**2.5, rtol=1e-13)


@pytest.mark.parametrize("beta", [0.5, 1.0, 1.7])
def test_rhs_linear_plane_wave(beta):
    g = make_grid(1, 128, 4.0)
    f = sample("plane_wave:5", g)
    out = rhs(f, 1.0, 2.0, beta, source=False, signed=True).values
    k = 5 * math.pi / 4.0
    assert np.max(np.abs(out + k**beta * f.values)) <= 1e-12 * k**beta


def test_zero_field_stays_zero():
    g = make_grid(1, 64, 5.0)
    model = Model(g, PDEParams(1.0, 2.0, 1.0), True)
    state = SimState(np.zeros(g.shape))
    for _ in range(5):
        step(state, SimControls(t_max=1.0), model)
    assert np.all(state.u == 0.0)


def test_controls_validation():
    with pytest.raises(ValueError):
        SimControls(t_max=0.0)
    with pytest.raises(ValueError):
        SimControls(t_max=1.0, cfl=1.5)
    with pytest.raises(ValueError):
        SimControls(t_max=1e-12)
    with pytest.raises(ValueError):
        SimControls(t_max=1.0, record_stride=0)
    g = make_grid(1, 64, 5.0)
    with pytest.raises(ValueError, match="threshold"):
        run(sample("constant:10", g), PDEParams(1, 2, 1), SimControls(1.0, blowup_threshold=5.0))


# }}}


# {{{ oracles


def test_linear_exact_cases():
    g = make_grid(1, 128, 6.0)
    f = sample("gaussian:1,1", g)
    assert np.allclose(linear_exact(f, 0.0, 1.0).values, f.values, atol=1e-15)
    pw = sample("plane_wave:3", g)
    k = 3 * math.pi / 6.0
    assert np.allclose(linear_exact(pw, 1.0, 0.8).values, math.exp(-k**0.8) * pw.values, atol=1e-14)


def test_linear_exact_heat_kernel():
    g = make_grid(1, 512, 20.0)
    t = 0.5
    out = linear_exact(sample("gaussian:1,1", g), t, 2.0).values
    w2 = 1.0 + 2 * t
    expect = np.exp(-g.axis**2 / (2 * w2)) / math.sqrt(w2)
    assert np.max(np.abs(out - expect)) <= 1e-10


def _linear_error(cfl):
    g = make_grid(1, 256, 20.0)
    u0 = sample("gaussian:1,1", g)
    out = run(u0, PDEParams(1.0, 2.0, 1.0, source=False), SimControls(t_max=1.0, cfl=cfl))
    return rel_l2(out.final.values, linear_exact(u0, 1.0, 1.0).values)


def test_linear_case_accuracy_and_order():
    e1, e2 = _linear_error(0.4), _linear_error(0.2)
    assert e1 <= 1e-6
    assert e1 / e2 >= 6.0


def test_ode_reduction_trajectory_and_blowup_time():
    g = make_grid(1, 16, 1.0)
    c, q = 1.0, 2.0
    t_star = c ** (1 - q) / (q - 1)
    out = run(sample(f"constant:{c}", g), PDEParams(1.0, q, 1.0), SimControls(t_max=2.0, cfl=0.1))
    assert out.classification is Classification.BLOWUP
    assert abs(out.t_blowup - t_star) <= 0.02 * t_star
    t, s = np.array([h[0] for h in out.history]), np.array([h[1] for h in out.history])
    m = t <= 0.9 * t_star
    exact = c * (1 - (q - 1) * c ** (q - 1) * t[m]) ** (-1 / (q - 1))
    assert np.max(np.abs(s[m] / exact - 1)) <= 0.01


def test_blowup_by_step_collapse():
    g = make_grid(1, 16, 1.0)
    out = run(sample("constant:1", g), PDEParams(1.0, 2.0, 1.0), SimControls(t_max=2.0, dt_min=1e-5, blowup_threshold=1e300))
    assert out.classification is Classification.BLOWUP
    assert "dt_min" in out.reason


# }}}


# {{{ runs


def test_subcritical_gaussian_blows_up():
    g = make_grid(1, 512, 40.0)
    out = run(sample("gaussian:1,1", g), PDEParams(1.0, 1.5, 1.0), SimControls(t_max=100.0))
    assert out.classification is Classification.BLOWUP
    assert out.t_blowup is not None and math.isfinite(out.t_blowup)
    assert out.predicted_regime.value == "T1_nonexistence_strict" and not out.exploratory
    t = [h[0] for h in out.history]
    assert all(b > a for a, b in zip(t, t[1:]))
    assert out.diagnostics["min_over_sup_resolved"] >= -1e-6


def test_supercritical_small_data_decays():
    g = make_grid(1, 512, 40.0)
    out = run(sample("gaussian:0.01,1", g), PDEParams(1.0, 3.0, 1.0), SimControls(t_max=50.0))
    assert out.classification is Classification.DECAY
    assert out.exploratory


def test_zero_data_decays():
    g = make_grid(1, 64, 10.0)
    out = run(sample("constant:0", g), PDEParams(1.0, 1.5, 1.0), SimControls(t_max=5.0))
    assert out.classification is Classification.DECAY and out.final_sup == 0.0


def test_probe_rejects_negative_data():
    g = make_grid(1, 64, 10.0)
    with pytest.raises(ValueError, match="u0 >= 0"):
        run(-sample("gaussian:1,1", g), PDEParams(1.0, 1.5, 1.0), SimControls(1.0))


def test_amplitude_ladder_monotone():
    g = make_grid(1, 256, 40.0)
    times = []
    for a in (0.6, 0.8, 1.0, 1.5, 2.0):
        out = run(sample(f"gaussian:{a},1", g), PDEParams(1.0, 1.5, 1.0), SimControls(t_max=200.0))
        assert out.classification is Classification.BLOWUP
        times.append(out.t_blowup)
    assert all(b <= a for a, b in zip(times, times[1:]))


@pytest.mark.parametrize("p, q", [(1.0, 1.5), (1.5, 2.0), (2.0, 2.5)])
def test_positivity_on_resolved_states(p, q):
    g = make_grid(1, 512, 40.0)
    out = run(sample("gaussian:1,1", g), PDEParams(p, q, 1.0), SimControls(t_max=50.0))
    assert out.diagnostics["min_over_sup_resolved"] >= -1e-6


def test_probe_theorem2():
    g = make_grid(2, 64, 20.0)
    with pytest.raises(ValueError, match="gamma"):
        probe_theorem2(2.0, 0.1, PDEParams(1.0, 1.5, 1.0, 2), SimControls(10.0), g)
    zero = probe_theorem2(1.0, 0.0, PDEParams(1.0, 1.5, 1.0, 2), SimControls(2.0), g)
    assert zero.classification is Classification.DECAY
    assert zero.diagnostics["q_star_star"] == 2.0 and zero.diagnostics["delta_star"] == pytest.approx(1.0)


@pytest.mark.slow
def test_probe_theorem2_blows_up_in_two_dimensions():
    g = make_grid(2, 128, 20.0)
    out = probe_theorem2(1.0, 0.1, PDEParams(1.0, 1.5, 1.0, 2), SimControls(100.0), g)
    assert out.classification is Classification.BLOWUP
    # q = 1.5 is also q* in two dimensions, so the first theorem already claims it
    assert out.predicted_regime.predicts_nonexistence
    assert out.diagnostics["delta_star"] == pytest.approx(1.0)
    assert out.diagnostics["boundary_value_u0"] > 0


def test_final_field_is_field():
    g = make_grid(1, 64, 10.0)
    out = run(sample("gaussian:1,1", g), PDEParams(1.0, 3.0, 1.0), SimControls(1.0))
    assert isinstance(out.final, Field) and out.final.grid == g


# }}}
