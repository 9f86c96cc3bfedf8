"""Numerical kernels for the closed-form outage expressions.

Provides the Gauss hypergeometric function 2F1 on the negative real axis
(evaluated from its Euler integral representation), erf / log-gamma wrappers
with domain validation, and a composite Simpson integrator with panel
doubling and an optional semi-infinite domain transform.
"""

import math
from dataclasses import dataclass

import numpy as np

from .common import NumericalError

__all__ = [
    "QuadratureSpec",
    "erf",
    "log_gamma",
    "simpson",
    "gauss_2f1",
]

_MAX_PANELS = 1 << 21


@dataclass(frozen=True)
class QuadratureSpec:
    """Panel count, domain transform and tolerance for `simpson`.

    transform: "identity" integrates f on [a, b]; "semi_infinite" integrates
    f on [a, inf) through the substitution x = a + scale*t/(1-t), t in (0, 1).
    """

    panels: int = 64
    transform: str = "identity"
    tol: float = 1e-9
    scale: float = 1.0

    def __post_init__(self):
        if self.panels <= 0 or self.panels % 2 != 0:
            raise ValueError(f"panels must be a positive even integer, got {self.panels}")
        if self.transform not in ("identity", "semi_infinite"):
            raise ValueError(f"unknown transform {self.transform!r}")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.scale <= 0:
            raise ValueError("scale must be positive")


def erf(x: float) -> float:
    """Error function."""
    return math.erf(x)


def log_gamma(x: float) -> float:
    """Natural log of the gamma function, restricted to x > 0."""
    if x <= 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def _simpson_sum(fv: np.ndarray, h: float) -> float:
    # fv holds f at n+1 equispaced nodes, n even
    return (h / 3.0) * (fv[0] + fv[-1] + 4.0 * fv[1:-1:2].sum() + 2.0 * fv[2:-1:2].sum())


def _simpson_adaptive(f, a: float, b: float, panels: int, tol: float) -> float:
    """Composite Simpson on [a, b], doubling panels until the estimate moves
    by less than `tol` (absolute).  f must accept ndarray arguments."""
    n = panels
    x = np.linspace(a, b, n + 1)
    fv = np.asarray(f(x), dtype=float)
    est = _simpson_sum(fv, (b - a) / n)
    while True:
        n *= 2
        if n > _MAX_PANELS:
            raise NumericalError(
                f"Simpson integration did not reach tol={tol:g} within {_MAX_PANELS} panels",
                last_estimate=est,
            )
        mids = np.linspace(a, b, n + 1)[1::2]
        fm = np.asarray(f(mids), dtype=float)
        merged = np.empty(n + 1)
        merged[0::2] = fv
        merged[1::2] = fm
        new_est = _simpson_sum(merged, (b - a) / n)
        fv = merged
        if abs(new_est - est) < tol:
            return new_est
        est = new_est


def simpson(f, a: float, b: float = math.inf, spec: QuadratureSpec | None = None) -> float:
    """Integrate f over [a, b] (or [a, inf) with the semi-infinite transform).

    f must be vectorized over ndarray inputs.  Panel count starts at
    spec.panels and doubles until successive estimates agree within spec.tol;
    non-convergence raises NumericalError carrying the last estimate.
    """
    spec = spec or QuadratureSpec()
    if spec.transform == "identity":
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("identity transform requires finite bounds")
        if not a < b:
            raise ValueError(f"need a < b, got a={a}, b={b}")
        return _simpson_adaptive(f, a, b, spec.panels, spec.tol)

    # x = a + s*t/(1-t): dx = s/(1-t)^2 dt; the t=1 endpoint is assigned 0,
    # valid whenever x^2 f(x) -> 0 at infinity.
    s = spec.scale

    def g(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        interior = (t > 0.0) & (t < 1.0)
        ti = t[interior]
        x = a + s * ti / (1.0 - ti)
        out[interior] = np.asarray(f(x), dtype=float) * s / (1.0 - ti) ** 2
        if np.any(t == 0.0):
            out[t == 0.0] = float(np.asarray(f(np.array([a])), dtype=float)[0]) * s
        return out

    return _simpson_adaptive(g, 0.0, 1.0, spec.panels, spec.tol)


def _simpson_to_rel_tol(f, a: float, b: float, panels: int, rel_tol: float) -> float:
    """Panel-doubling Simpson with a mixed relative/absolute stop criterion."""
    n = panels
    x = np.linspace(a, b, n + 1)
    fv = np.asarray(f(x), dtype=float)
    est = _simpson_sum(fv, (b - a) / n)
    while True:
        n *= 2
        if n > _MAX_PANELS:
            raise NumericalError(
                f"Euler-integral quadrature stalled at rel_tol={rel_tol:g}",
                last_estimate=est,
            )
        mids = np.linspace(a, b, n + 1)[1::2]
        fm = np.asarray(f(mids), dtype=float)
        merged = np.empty(n + 1)
        merged[0::2] = fv
        merged[1::2] = fm
        new_est = _simpson_sum(merged, (b - a) / n)
        fv = merged
        if abs(new_est - est) <= rel_tol * abs(new_est) + 1e-300:
            return new_est
        est = new_est


def gauss_2f1(a: float, b: float, c: float, x: float, rel_tol: float = 1e-11) -> float:
    """Gauss hypergeometric function 2F1([a, b]; c; x) for x <= 0, c > b > 0.

    Evaluated from the Euler integral

        2F1 = Gamma(c)/(Gamma(b) Gamma(c-b)) *
              int_0^1 v^(b-1) (1-v)^(c-b-1) (1-x v)^(-a) dv,

    which is valid on the requested parameter region.  The integrable
    endpoint singularities (exponents b-1 and c-b-1 below zero) are removed
    by the substitutions v = u^(1/b) and 1-v = u^(1/(c-b)) on the two halves
    of the domain, so the quadrature only ever sees smooth integrands.
    """
    if not (c > b > 0):
        raise ValueError(f"gauss_2f1 requires c > b > 0, got b={b}, c={c}")
    if x > 0:
        raise ValueError(f"gauss_2f1 is restricted to x <= 0, got x={x}")
    if x == 0.0:
        return 1.0

    cb = c - b
    # Integer powers p, q chosen so the transformed endpoint factors u^(p*b-1)
    # and u^(q*(c-b)-1) have at least four bounded derivatives, preserving the
    # O(h^4) Simpson rate for fractional exponents.
    p = max(1, math.ceil(5.0 / b))
    q = max(1, math.ceil(5.0 / cb))

    def left(u):
        # v in [0, 1/2] via v = u^p
        v = u ** p
        return p * u ** (p * b - 1.0) * (1.0 - v) ** (cb - 1.0) * (1.0 - x * v) ** (-a)

    def right(u):
        # v in [1/2, 1] via 1 - v = u^q
        v = 1.0 - u ** q
        return q * u ** (q * cb - 1.0) * v ** (b - 1.0) * (1.0 - x * v) ** (-a)

    integral = _simpson_to_rel_tol(left, 0.0, 0.5 ** (1.0 / p), 64, rel_tol)
    integral += _simpson_to_rel_tol(right, 0.0, 0.5 ** (1.0 / q), 64, rel_tol)
    log_k = math.lgamma(c) - math.lgamma(b) - math.lgamma(cb)
    return math.exp(log_k) * integral
