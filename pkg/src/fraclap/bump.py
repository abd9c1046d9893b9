"""Smooth cutoff profile built from the ``exp(-1/t)`` transition."""

from __future__ import annotations

import numpy as np


def _f(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _df(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    tp = t[pos]
    out[pos] = np.exp(-1.0 / tp) / (tp * tp)
    return out


def smooth_step(t):
    """``h(t) = f(t) / (f(t) + f(1 - t))``: 0 for t <= 0, 1 for t >= 1, C-infinity."""
    t = np.asarray(t, dtype=np.float64)
    a, b = _f(t), _f(1.0 - t)
    return a / (a + b)


def smooth_step_derivative(t):
    t = np.asarray(t, dtype=np.float64)
    a, b = _f(t), _f(1.0 - t)
    da, db = _df(t), _df(1.0 - t)
    return (da * b + a * db) / (a + b) ** 2


def bump_profile(r):
    """Phi(r): 1 on [0, 1/2], h(2(1 - r)) on (1/2, 1), 0 on [1, inf).

    Non-increasing with values in [0, 1]; every derivative vanishes at
    r = 1/2 and r = 1. The plateau and the exterior are exact (no rounding).
    """
    r = np.asarray(r, dtype=np.float64)
    out = smooth_step(2.0 * (1.0 - r))
    out = np.where(r <= 0.5, 1.0, out)
    out = np.where(r >= 1.0, 0.0, out)
    return out if out.ndim else float(out)


def bump_derivative(r):
    """d Phi / dr, evaluated in closed form."""
    r = np.asarray(r, dtype=np.float64)
    out = -2.0 * smooth_step_derivative(2.0 * (1.0 - r))
    out = np.where((r <= 0.5) | (r >= 1.0), 0.0, out)
    return out if out.ndim else float(out)
