"""Exact outage probability conditioned on the normalized powers.

Given fixed normalized powers Omega, integer source shape m0, and collision
probabilities p_i, the SINR outage probability has a closed form built from
per-interferer weights

    G_0 = 1 - p_i (1 - Psi_i^{m_i})
    G_l = p_i * Gamma(l+m_i)/(l! Gamma(m_i)) * (Omega_i/m_i)^l * Psi_i^{m_i+l}

with Psi_i = (1 + beta0 Omega_i / m_i)^-1 and beta0 = m0*beta/Omega_0.  The
coefficients H_k (sums of products of G_l over all index combinations
summing to k) are obtained by truncated polynomial multiplication, which is
exactly equivalent to the explicit combinatorial sum but costs O(M*m0^2).
Products are accumulated in log scale so large networks cannot underflow.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .network import NormalizedPowers

__all__ = [
    "ConditionalOutageInput",
    "psi_vector",
    "collision_weight",
    "hk_coefficients",
    "conditional_outage",
    "conditional_outage_rayleigh",
]


@dataclass(frozen=True)
class ConditionalOutageInput:
    """Inputs for a conditional outage evaluation.

    omega: normalized powers [Omega_0, ..., Omega_M]; m: Nakagami shapes
    [m_0, ..., m_M]; p: per-interferer collision probabilities; beta and
    gamma_snr are linear (not dB).
    """

    omega: np.ndarray
    m: np.ndarray
    p: np.ndarray
    beta: float
    gamma_snr: float

    def __post_init__(self):
        w = self.omega.omega if isinstance(self.omega, NormalizedPowers) else self.omega
        w = np.atleast_1d(np.asarray(w, dtype=float))
        m = np.atleast_1d(np.asarray(self.m, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float)) if np.size(self.p) else np.zeros(0)
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "p", p)
        if self.beta <= 0 or self.gamma_snr <= 0:
            raise ValueError("beta and gamma_snr must be positive (linear scale)")
        if w.size < 1 or np.any(w < 0):
            raise ValueError("normalized powers must be nonnegative, source first")
        if w[0] <= 0:
            raise ValueError("source power Omega_0 must be positive")
        if m.size != w.size:
            raise ValueError("need one Nakagami parameter per transmitter (source first)")
        if np.any(m < 0.5):
            raise ValueError("Nakagami parameters must be >= 0.5")
        if p.size == 1 and w.size > 2:
            p = np.full(w.size - 1, p[0])
            object.__setattr__(self, "p", p)
        if p.size != w.size - 1:
            raise ValueError("need one collision probability per interferer")
        if np.any((p < 0) | (p > 1)):
            raise ValueError("collision probabilities must lie in [0, 1]")

    @property
    def m0(self) -> int:
        m0 = self.m[0]
        if abs(m0 - round(m0)) > 1e-9 or m0 < 1:
            raise ValueError(
                f"the closed form requires an integer-valued source Nakagami "
                f"parameter m0 >= 1, got {m0}"
            )
        return int(round(m0))


def psi_vector(omega_i, m_i, beta0: float) -> np.ndarray:
    """Psi_i = (1 + beta0 * Omega_i / m_i)^-1, in (0, 1]."""
    return 1.0 / (1.0 + beta0 * np.asarray(omega_i, dtype=float) / np.asarray(m_i, dtype=float))


def collision_weight(l: int, psi: float, omega_i: float, m_i: float, p_i: float) -> float:
    """Reference (unscaled) per-interferer weight G_l; used by tests/oracles."""
    if l == 0:
        return 1.0 - p_i * (1.0 - psi ** m_i)
    log_c = math.lgamma(l + m_i) - math.lgamma(l + 1) - math.lgamma(m_i)
    return p_i * math.exp(log_c) * (omega_i / m_i) ** l * psi ** (m_i + l)


def _interferer_polys(omega_i, m_i, p_i, beta0, k_max):
    """Scaled per-interferer coefficient polynomials.

    Returns (log_g0, ratios) where ratios[..., l-1] = G_l / G_0 for
    l = 1..k_max.  beta0 may carry leading axes (vectorized draws); the
    interferer axis is last.
    """
    omega_i = np.asarray(omega_i, dtype=float)
    m_i = np.asarray(m_i, dtype=float)
    p_i = np.asarray(p_i, dtype=float)
    beta0 = np.asarray(beta0, dtype=float)

    t = beta0[..., None] * (omega_i / m_i)
    log_psi = -np.log1p(t)
    with np.errstate(divide="ignore"):
        log_p = np.where(p_i > 0, np.log(np.where(p_i > 0, p_i, 1.0)), -np.inf)
        log_om = np.where(omega_i > 0, np.log(np.where(omega_i > 0, omega_i / m_i, 1.0)), -np.inf)

    one_minus_psi_m = -np.expm1(m_i * log_psi)
    log_g0 = np.where(
        p_i >= 1.0,
        m_i * log_psi,
        np.log1p(-np.minimum(p_i * one_minus_psi_m, 1.0 - 1e-300)),
    )
    log_g0 = np.broadcast_to(log_g0, t.shape).copy()

    if k_max == 0:
        return log_g0, np.zeros(t.shape + (0,))

    ls = np.arange(1, k_max + 1, dtype=float)
    log_comb = gammaln(ls + m_i[..., None]) - gammaln(ls + 1.0) - gammaln(m_i)[..., None]
    # broadcast (draws..., M) against (M, k_max) -> (draws..., M, k_max)
    log_ratio = (log_p[..., None]
                 + log_comb
                 + ls * log_om[..., None]
                 + (m_i[..., None] + ls) * log_psi[..., None]
                 - log_g0[..., None])
    with np.errstate(invalid="ignore"):
        ratios = np.where(np.isneginf(log_ratio), 0.0, np.exp(log_ratio))
    return log_g0, ratios


def _convolve_ratio_polys(log_g0, ratios, k_max):
    """Multiply the M per-interferer polynomials, truncated at degree k_max.

    Inputs carry the interferer axis second-to-last (log_g0: (..., M),
    ratios: (..., M, k_max)).  Returns (log_h0, hhat) where hhat[..., k] =
    H_k / H_0 and log_h0 = sum of per-interferer log G_0.
    """
    log_h0 = log_g0.sum(axis=-1)
    lead = ratios.shape[:-2]
    hhat = np.zeros(lead + (k_max + 1,))
    hhat[..., 0] = 1.0
    M = ratios.shape[-2]
    for i in range(M):
        poly = np.concatenate([np.ones(lead + (1,)), ratios[..., i, :]], axis=-1)
        out = np.zeros_like(hhat)
        for k in range(k_max + 1):
            for j in range(k + 1):
                out[..., k] += hhat[..., j] * poly[..., k - j]
        hhat = out
    return log_h0, hhat


def poly_power_truncated(poly: np.ndarray, n: int, k_max: int) -> np.ndarray:
    """n-th power of a coefficient polynomial, truncated at degree k_max.

    poly has the coefficient axis last and may carry leading draw axes.
    Used for networks of interferers with identical statistics, where the
    M-fold product of identical polynomials collapses to a power.
    """
    lead = poly.shape[:-1]
    result = np.zeros(lead + (k_max + 1,))
    result[..., 0] = 1.0
    base = np.zeros(lead + (k_max + 1,))
    base[..., : min(poly.shape[-1], k_max + 1)] = poly[..., : k_max + 1]
    e = n
    while e > 0:
        if e & 1:
            result = _truncated_product(result, base, k_max)
        e >>= 1
        if e:
            base = _truncated_product(base, base, k_max)
    return result


def _truncated_product(a: np.ndarray, b: np.ndarray, k_max: int) -> np.ndarray:
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for k in range(k_max + 1):
        for j in range(k + 1):
            out[..., k] += a[..., j] * b[..., k - j]
    return out


def hk_coefficients(omega, m, p, beta0: float, k_max: int) -> np.ndarray:
    """Coefficients H_0..H_k_max by truncated polynomial convolution.

    omega, m, p are the per-interferer arrays (no source entry).  The result
    equals the explicit sum over all nonnegative index vectors (l_1..l_M)
    with sum k of the product of per-interferer weights G_{l_i}.
    """
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    m = np.atleast_1d(np.asarray(m, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float)) if np.size(p) else np.zeros(0)
    if omega.size == 0:
        h = np.zeros(k_max + 1)
        h[0] = 1.0
        return h
    log_g0, ratios = _interferer_polys(omega, m, p, np.float64(beta0), k_max)
    log_h0, hhat = _convolve_ratio_polys(log_g0, ratios, k_max)
    return np.exp(log_h0) * hhat


def _ccdf_from_coeffs(beta0, z: float, log_h0, hhat, m0: int):
    """Complementary cdf of the SINR margin variable at z, from scaled H_k.

    Everything is evaluated in log scale and clipped into [0, 1]; beta0,
    log_h0 and hhat may carry a leading draw axis.
    """
    beta0 = np.asarray(beta0, dtype=float)
    log_bz = np.log(beta0 * z)
    log_z = math.log(z)
    with np.errstate(divide="ignore"):
        log_hhat = np.where(hhat > 0, np.log(np.where(hhat > 0, hhat, 1.0)), -np.inf)
    terms = np.full(beta0.shape + (m0 * (m0 + 1) // 2,), -np.inf)
    idx = 0
    for s in range(m0):
        for t in range(s + 1):
            terms[..., idx] = (s * log_bz - t * log_z
                               - math.lgamma(s - t + 1) + log_hhat[..., t])
            idx += 1
    peak = terms.max(axis=-1)
    with np.errstate(invalid="ignore"):
        log_sum = peak + np.log(np.exp(terms - peak[..., None]).sum(axis=-1))
    log_sum = np.where(np.isneginf(peak), -np.inf, log_sum)
    log_ccdf = -beta0 * z + log_h0 + log_sum
    return np.exp(np.minimum(log_ccdf, 0.0))


def conditional_outage(inp: ConditionalOutageInput) -> float:
    """Outage probability for fixed normalized powers (general Nakagami)."""
    m0 = inp.m0
    beta0 = m0 * inp.beta / inp.omega[0]
    z = 1.0 / inp.gamma_snr
    if inp.omega.size == 1:
        log_h0 = np.float64(0.0)
        hhat = np.zeros(m0)
        hhat[0] = 1.0
    else:
        log_g0, ratios = _interferer_polys(inp.omega[1:], inp.m[1:], inp.p,
                                           np.float64(beta0), m0 - 1)
        log_h0, hhat = _convolve_ratio_polys(log_g0, ratios, m0 - 1)
    ccdf = _ccdf_from_coeffs(np.float64(beta0), z, log_h0, hhat, m0)
    return float(np.clip(1.0 - ccdf, 0.0, 1.0))


def conditional_outage_rayleigh(inp: ConditionalOutageInput) -> float:
    """Outage probability when every link is Rayleigh (all m_i = 1).

    Algebraic specialization of the general form:
    eps = 1 - exp(-beta0 z) * prod_i (1 + beta0 (1-p_i) Omega_i)/(1 + beta0 Omega_i).
    """
    if np.any(np.abs(inp.m - 1.0) > 1e-12):
        raise ValueError("the Rayleigh form requires m_i = 1 for every link")
    beta0 = inp.beta / inp.omega[0]
    z = 1.0 / inp.gamma_snr
    log_prod = float(np.sum(np.log1p(beta0 * (1.0 - inp.p) * inp.omega[1:])
                            - np.log1p(beta0 * inp.omega[1:])))
    ccdf = math.exp(min(-beta0 * z + log_prod, 0.0))
    return min(max(1.0 - ccdf, 0.0), 1.0)
