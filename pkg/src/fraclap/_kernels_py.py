"""Pure-numpy fallback for the compiled quadrature kernels.

Summation order matches ``_kernels.pyx`` exactly: for every grid point the
offsets are visited in the order given, so both paths agree bitwise on
platforms without FMA contraction.
"""

from __future__ import annotations

import numpy as np


def sym_difference_sum(psi: np.ndarray, offsets: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """S_i = sum_j w_j * (2 psi_i - psi_{i+o_j} - psi_{i-o_j}) with periodic wrap.

    ``psi`` is 1-D or 2-D; ``offsets`` has shape (m, psi.ndim).
    """
    psi = np.ascontiguousarray(psi, dtype=np.float64)
    axes = tuple(range(psi.ndim))
    two = psi + psi
    acc = np.zeros_like(psi)
    for off, w in zip(offsets, weights):
        fwd = np.roll(psi, tuple(-int(o) for o in off), axis=axes)
        bwd = np.roll(psi, tuple(int(o) for o in off), axis=axes)
        acc += w * ((two - fwd) - bwd)
    return acc
