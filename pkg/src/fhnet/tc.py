"""Throughput and transmission-capacity metrics.

The throughput of one link is T = R * eta(h) * B * (1 - eps) / L'; weighting
by the interferer density lambda = M / (pi (r_net^2 - r_ex^2)) and dividing
by bandwidth gives the normalized modulation-constrained transmission
capacity tau' = lambda R eta(h) (1 - eps) / L' in bps/Hz/m^2.  Table-style
outputs are reported in bps/kHz-m^2 (1000x) when distances are in normalized
units.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cpfsk import spectral_efficiency

__all__ = [
    "TcResult",
    "TcConstraintResult",
    "interferer_density",
    "throughput",
    "normalized_tc",
    "tc_with_outage_constraint",
]


@dataclass(frozen=True)
class TcResult:
    """Transmission-capacity evaluation at one parameter point.

    tau_normalized is in bps/Hz/m^2; tau_absolute (bps/m^2) and throughput
    (bps) are populated only when a system bandwidth B was supplied.
    """

    tau_normalized: float
    epsilon: float
    lambda_density: float
    tau_absolute: float | None = None
    throughput: float | None = None

    @property
    def tau_per_khz(self) -> float:
        return 1000.0 * self.tau_normalized


@dataclass(frozen=True)
class TcConstraintResult:
    """Outage-constrained transmission capacity tau_c = lambda*(zeta) (1-zeta)."""

    tau_c: float
    lambda_star: float
    M_star: int
    feasible: bool
    diagnostic: str = ""


def interferer_density(M: int, r_ex: float, r_net: float) -> float:
    """Interferers per unit area over the annulus."""
    if r_ex < 0 or r_net <= r_ex:
        raise ValueError("need r_net > r_ex >= 0")
    return M / (math.pi * (r_net ** 2 - r_ex ** 2))


def throughput(R: float, h: float, eps: float, L_eff: float, B: float) -> float:
    """Average data rate in bps: T = R eta(h) B (1 - eps) / L'."""
    if not 0 <= eps <= 1:
        raise ValueError("outage probability must lie in [0, 1]")
    if L_eff < 1 or B <= 0:
        raise ValueError("need L_eff >= 1 and positive bandwidth")
    return R * spectral_efficiency(h) * B * (1.0 - eps) / L_eff


def normalized_tc(M: int, r_ex: float, r_net: float, R: float, h: float,
                  eps: float, L_eff: float, B: float | None = None) -> TcResult:
    """Normalized modulation-constrained transmission capacity."""
    if not 0 <= eps <= 1:
        raise ValueError("outage probability must lie in [0, 1]")
    lam = interferer_density(M, r_ex, r_net)
    tau_norm = lam * R * spectral_efficiency(h) * (1.0 - eps) / L_eff
    tau_abs = thr = None
    if B is not None:
        thr = throughput(R, h, eps, L_eff, B)
        tau_abs = lam * thr
    return TcResult(tau_normalized=tau_norm, epsilon=eps, lambda_density=lam,
                    tau_absolute=tau_abs, throughput=thr)


def tc_with_outage_constraint(zeta: float, eps_of_m, M_max: int, r_ex: float,
                              r_net: float) -> TcConstraintResult:
    """Largest interferer density whose outage stays within zeta.

    eps_of_m maps an integer interferer count to the spatially averaged
    outage probability; it is assumed (and spot-checked) nondecreasing in M.
    The crossing density is linearly interpolated between the bracketing
    integer counts, and tau_c = lambda* (1 - zeta).
    """
    if not 0 < zeta < 1:
        raise ValueError("outage constraint must lie in (0, 1)")
    if M_max < 1:
        raise ValueError("M_max must be at least 1")
    area = math.pi * (r_net ** 2 - r_ex ** 2)

    eps_lo = eps_of_m(1)
    if eps_lo > zeta:
        return TcConstraintResult(
            tau_c=0.0, lambda_star=0.0, M_star=0, feasible=False,
            diagnostic=f"a single interferer already gives eps={eps_lo:.4g} > zeta={zeta:.4g}")
    eps_hi = eps_of_m(M_max)
    if eps_hi <= zeta:
        lam = M_max / area
        return TcConstraintResult(
            tau_c=lam * (1.0 - zeta), lambda_star=lam, M_star=M_max, feasible=True,
            diagnostic=f"constraint slack at M_max={M_max} (eps={eps_hi:.4g})")

    cache = {1: eps_lo, M_max: eps_hi}
    lo, hi = 1, M_max  # eps(lo) <= zeta < eps(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        e = cache.setdefault(mid, eps_of_m(mid))
        if e <= zeta:
            lo = mid
        else:
            hi = mid
    ordered = sorted(cache.items())
    for (m0_, e0), (m1_, e1) in zip(ordered, ordered[1:]):
        if e1 < e0 - 1e-12:
            raise ValueError(
                f"outage is not monotone over the sweep: eps({m0_})={e0:.4g} > eps({m1_})={e1:.4g}")
    e_lo, e_hi = cache[lo], cache[hi]
    frac = 0.0 if e_hi == e_lo else (zeta - e_lo) / (e_hi - e_lo)
    m_cross = lo + frac
    lam = m_cross / area
    return TcConstraintResult(tau_c=lam * (1.0 - zeta), lambda_star=lam,
                              M_star=lo, feasible=True,
                              diagnostic=f"crossing between M={lo} and M={hi}")
