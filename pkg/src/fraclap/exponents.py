"""Critical exponents of ``u_t + (-Delta)^{beta/2}(|u|^p) = |u|^q`` and regime classification.

All functions accept floats or :class:`fractions.Fraction`; with Fractions
the arithmetic is exact, which is what the criticality identities need.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from fractions import Fraction
from numbers import Real

CRITICAL_TOL = 1e-12
# float values farther than this from zero have a certified sign (rounding is ~1e-15)
SIGN_MARGIN = 1e-9


class Regime(str, Enum):
    T1_STRICT = "T1_nonexistence_strict"
    T1_CRITICAL = "T1_nonexistence_critical"
    T2 = "T2_nonexistence"
    OUTSIDE = "outside_theorems"

    @property
    def theorem(self) -> str | None:
        return {"T1": "Theorem 1", "T2": "Theorem 2"}.get(self.value[:2])

    @property
    def predicts_nonexistence(self) -> bool:
        return self is not Regime.OUTSIDE


@dataclass(frozen=True)
class ExponentParams:
    p: Real
    q: Real
    beta: Real
    N: int = 1
    gamma: Real | None = None
    epsilon: Real | None = None

    def __post_init__(self) -> None:
        if not self.p > 0:
            raise ValueError(f"p must be positive, got {self.p}")
        if not self.q > 1:
            raise ValueError(f"q must exceed 1, got {self.q}")
        if not 0 < self.beta < 2:
            raise ValueError(f"beta must lie in (0, 2), got {self.beta}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if self.gamma is not None and not 0 < self.gamma < self.N:
            raise ValueError(f"gamma={self.gamma} violates 0 < gamma < N={self.N} (Theorem 2)")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class DerivedExponents:
    alpha: float
    delta: float
    q_star: float
    elliptic_sup: float
    delta_star: float | None = None
    q_star_star: float | None = None

    def as_dict(self) -> dict:
        """Floats for JSON; an infinite elliptic bound is spelled ``"inf"``."""
        out = {}
        for k, v in asdict(self).items():
            v = None if v is None else float(v)
            out[k] = "inf" if v == math.inf else v
        return out


def alpha(p, q, beta):
    """Space-time scaling exponent ``(q - p) / (beta (q - 1))``."""
    if not q > 1:
        raise ValueError(f"q must exceed 1, got {q}")
    if not q > p:
        raise ValueError(f"q={q} <= p={p}: the scalings need p < q")
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return (q - p) / (beta * (q - 1))


def conjugate(q):
    """Hoelder conjugate ``q / (q - 1)``."""
    return q / (q - 1)


def delta(params: ExponentParams):
    """``q/(q-1) - N alpha - 1``; nonnegative exactly when q <= q*."""
    a = alpha(params.p, params.q, params.beta)
    return conjugate(params.q) - params.N * a - 1


def delta_star(params: ExponentParams):
    """``delta + alpha (N - gamma)``; positive exactly when q < q**."""
    if params.gamma is None:
        raise ValueError("delta_star needs gamma")
    a = alpha(params.p, params.q, params.beta)
    return conjugate(params.q) - params.N * a - 1 + a * (params.N - params.gamma)


def delta_star_closed(params: ExponentParams):
    """Equivalent form ``(beta - gamma (q - p)) / (beta (q - 1))``."""
    if params.gamma is None:
        raise ValueError("delta_star needs gamma")
    p, q, b, g = params.p, params.q, params.beta, params.gamma
    return (b - g * (q - p)) / (b * (q - 1))


def q_star(p, beta, N):
    if not p > 0 or not beta > 0 or N < 1:
        raise ValueError("q_star needs p > 0, beta > 0, N >= 1")
    return p + beta / N


def q_star_star(p, beta, gamma):
    if not p > 0 or not beta > 0 or not gamma > 0:
        raise ValueError("q_star_star needs p > 0, beta > 0, gamma > 0")
    return p + beta / gamma


def elliptic_sup(p, beta, N):
    """Upper end ``N p / (N - beta)_+`` of the elliptic nonexistence range (inf when N <= beta)."""
    if not p > 0 or not beta > 0 or N < 1:
        raise ValueError("elliptic_sup needs p > 0, beta > 0, N >= 1")
    if N - beta <= 0:
        return math.inf
    return N * p / (N - beta)


def derive(params: ExponentParams) -> DerivedExponents:
    p, q, b, N = params.p, params.q, params.beta, params.N
    kw = {}
    if params.gamma is not None:
        kw = {"delta_star": delta_star(params), "q_star_star": q_star_star(p, b, params.gamma)}
    return DerivedExponents(
        alpha=alpha(p, q, b),
        delta=delta(params),
        q_star=q_star(p, b, N),
        elliptic_sup=elliptic_sup(p, b, N),
        **kw,
    )


def is_critical(q, qc) -> bool:
    if isinstance(q, Fraction) and isinstance(qc, Fraction):
        return q == qc
    return abs(q - qc) <= CRITICAL_TOL * max(1.0, abs(qc))


def as_exact(params: ExponentParams) -> ExponentParams:
    """Same tuple with every real field as an exact Fraction (floats convert exactly)."""
    conv = {k: None if v is None else Fraction(v) for k, v in asdict(params).items() if k != "N"}
    return ExponentParams(N=params.N, **conv)


def as_float(params: ExponentParams) -> ExponentParams:
    conv = {k: None if v is None else float(v) for k, v in asdict(params).items() if k != "N"}
    return ExponentParams(N=params.N, **conv)


def certified_sign(fn, params: ExponentParams, exact=None) -> int:
    """Sign of ``fn(params)``: float evaluation, exact rational fallback near zero.

    ``exact`` optionally supplies the exact tuple (or a zero-argument
    callable producing it) when ``params`` is a float approximation.
    """
    fp = params if all(isinstance(v, float) or v is None for v in (params.p, params.q, params.beta, params.gamma)) \
        else as_float(params)
    v = float(fn(fp))
    if abs(v) > SIGN_MARGIN:
        return 1 if v > 0 else -1
    if exact is None:
        ex = as_exact(params)
    else:
        ex = exact() if callable(exact) else exact
    e = fn(ex)
    return (e > 0) - (e < 0)


def classify(params: ExponentParams) -> Regime:
    """Theorem 1 when it applies (it needs only u0 >= 0), else Theorem 2 if gamma is given."""
    p, q = params.p, params.q
    qs = q_star(p, params.beta, params.N)
    if p < q:
        if is_critical(q, qs):
            return Regime.T1_CRITICAL
        if q < qs:
            return Regime.T1_STRICT
        if params.gamma is not None and q < q_star_star(p, params.beta, params.gamma):
            return Regime.T2
    return Regime.OUTSIDE


def report(params: ExponentParams) -> dict:
    """JSON-ready record of every derived exponent and the regime."""
    regime = classify(params)
    out = {
        "p": float(params.p),
        "q": float(params.q),
        "beta": float(params.beta),
        "N": int(params.N),
        "gamma": None if params.gamma is None else float(params.gamma),
        "epsilon": None if params.epsilon is None else float(params.epsilon),
        "q_tilde": float(conjugate(params.q)),
    }
    if params.q > params.p:
        out.update(derive(params).as_dict())
    out["regime"] = regime.value
    out["theorem"] = regime.theorem
    return out
