"""Brute-force Monte Carlo simulation of the outage experiment.

Independent of the closed forms: every trial draws the Nakagami power gains
(Gamma variates with unit mean), the collision indicators, and, in spatial
mode, fresh interferer positions and shadowing factors, then tests the
resulting SINR against the threshold.  Trials are partitioned into
fixed-size chunks with a counter-based generator keyed by (seed, chunk), and
chunk counts are reduced in index order, so estimates are bit-identical for
a given seed regardless of the worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .averaged import AveragedOutageInput
from .common import OutageResult, chunk_rng
from .network import NormalizedPowers

__all__ = [
    "McConfig",
    "mc_conditional_outage",
    "mc_conditional_outage_curve",
    "mc_spatial_outage",
]


@dataclass(frozen=True)
class McConfig:
    """Trial budget and stream key for a Monte Carlo run."""

    trials: int
    seed: int
    mode: str = "conditional"
    chunk_size: int = 1 << 16
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.mode not in ("conditional", "spatial"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.chunk_size < 1 or self.threads < 1:
            raise ValueError("chunk_size and threads must be positive")


def _chunk_sizes(cfg: McConfig):
    n_full, rem = divmod(cfg.trials, cfg.chunk_size)
    sizes = [cfg.chunk_size] * n_full
    if rem:
        sizes.append(rem)
    return sizes


def _run_chunks(cfg: McConfig, worker):
    """Run worker(chunk_index, chunk_trials) over all chunks, reducing in order."""
    sizes = _chunk_sizes(cfg)
    if cfg.threads == 1:
        results = [worker(i, n) for i, n in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(worker, range(len(sizes)), sizes))
    return results


def _binomial_result(successes: int, trials: int, cfg: McConfig, method: str) -> OutageResult:
    p_hat = successes / trials
    stderr = math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / trials)
    return OutageResult(value=p_hat, stderr=stderr, method=method,
                        trials=trials, seed=cfg.seed)


def _as_arrays(omega, m, p):
    w = omega.omega if isinstance(omega, NormalizedPowers) else np.atleast_1d(np.asarray(omega, dtype=float))
    m = np.atleast_1d(np.asarray(m, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float)) if np.size(p) else np.zeros(0)
    if p.size == 1 and w.size > 2:
        p = np.full(w.size - 1, p[0])
    if m.size != w.size or p.size != w.size - 1:
        raise ValueError("inconsistent omega/m/p lengths")
    return w, m, p


def _conditional_z(rng, n, omega, m, p):
    """Draw n realizations of the margin variable Z = g0 Omega_0/beta' - I.g.Omega.

    Returned without the 1/beta factor applied to the source term; callers
    scale as needed.  Shapes: omega, m are (M+1,) source first; p is (M,).
    """
    g0 = rng.gamma(shape=m[0], scale=1.0 / m[0], size=n)
    signal = g0 * omega[0]
    M = omega.size - 1
    if M == 0:
        return signal, np.zeros(n)
    g = rng.gamma(shape=m[1:], scale=1.0 / m[1:], size=(n, M))
    hits = rng.random((n, M)) < p
    interference = (g * omega[1:] * hits).sum(axis=1)
    return signal, interference


def mc_conditional_outage(omega, m, p, beta: float, gamma_snr: float,
                          cfg: McConfig) -> OutageResult:
    """Estimate the conditional outage probability for fixed powers.

    Per trial, draws the per-link Gamma power gains and Bernoulli collision
    indicators, forms the SINR, and counts events SINR <= beta.  Returns the
    estimate with its binomial standard error.
    """
    w, m, p = _as_arrays(omega, m, p)
    inv_gamma = 1.0 / gamma_snr

    def worker(idx, n):
        rng = chunk_rng(cfg.seed, idx)
        signal, interference = _conditional_z(rng, n, w, m, p)
        sinr = signal / (inv_gamma + interference)
        return int(np.count_nonzero(sinr <= beta))

    successes = sum(_run_chunks(cfg, worker))
    return _binomial_result(successes, cfg.trials, cfg, "monte-carlo-conditional")


def mc_conditional_outage_curve(omega, m, p, beta: float, gamma_db_values,
                                cfg: McConfig) -> list[OutageResult]:
    """Conditional outage versus SNR with common random numbers.

    One set of fading/collision draws is shared by every SNR point (the
    margin variable Z is drawn once per trial and compared against each
    1/SNR), which removes draw-to-draw jitter between adjacent points.
    """
    w, m, p = _as_arrays(omega, m, p)
    gammas = 10.0 ** (np.asarray(gamma_db_values, dtype=float) / 10.0)
    if gammas.size == 0:
        raise ValueError("empty SNR grid")
    inv_gammas = 1.0 / gammas

    def worker(idx, n):
        rng = chunk_rng(cfg.seed, idx)
        signal, interference = _conditional_z(rng, n, w, m, p)
        z = signal / beta - interference
        return (z[None, :] <= inv_gammas[:, None]).sum(axis=1)

    counts = sum(_run_chunks(cfg, worker))
    return [_binomial_result(int(k), cfg.trials, cfg, "monte-carlo-conditional")
            for k in counts]


def mc_spatial_outage(inp: AveragedOutageInput, cfg: McConfig) -> OutageResult:
    """Estimate the spatially averaged outage probability end to end.

    Per trial: draw interferer distances from the uniform-annulus radius law
    (bearings do not enter the received powers), log-normal shadowing for the
    source and every interferer when sigma_s > 0, Nakagami power gains, and
    collision indicators; then count SINR <= beta.
    """
    m0 = float(inp.m[0])
    m_i = inp.m[1:]
    sigma_n = inp.sigma_s * math.log(10.0) / 10.0
    inv_gamma = 1.0 / inp.gamma_snr
    r_ex2 = inp.r_ex ** 2
    span = inp.r_net ** 2 - r_ex2

    def worker(idx, n):
        rng = chunk_rng(cfg.seed, idx)
        omega0 = np.full(n, inp.omega_source)
        if inp.sigma_s > 0:
            omega0 = omega0 * np.exp(sigma_n * rng.standard_normal(n))
        g0 = rng.gamma(shape=m0, scale=1.0 / m0, size=n)
        signal = g0 * omega0
        if inp.M:
            radii = np.sqrt(r_ex2 + span * rng.random((n, inp.M)))
            omega = radii ** (-inp.alpha) / inp.c
            if inp.sigma_s > 0:
                omega *= np.exp(sigma_n * rng.standard_normal((n, inp.M)))
            g = rng.gamma(shape=m_i, scale=1.0 / m_i, size=(n, inp.M))
            hits = rng.random((n, inp.M)) < inp.p
            interference = (g * omega * hits).sum(axis=1)
        else:
            interference = np.zeros(n)
        sinr = signal / (inv_gamma + interference)
        return int(np.count_nonzero(sinr <= inp.beta))

    successes = sum(_run_chunks(cfg, worker))
    return _binomial_result(successes, cfg.trials, cfg, "monte-carlo-spatial")
