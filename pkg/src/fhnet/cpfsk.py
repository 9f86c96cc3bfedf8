"""Coded-CPFSK link abstraction.

The network analysis needs two scalars from the physical layer: the SINR
threshold beta at which a rate-R code fails, obtained by inverting the
symmetric information rate C(h, gamma) of binary CPFSK, and the spectral
efficiency eta(h), the symbol rate divided by the 99 percent-power bandwidth
of the modulation.

C(h, gamma) is estimated by Monte Carlo from a one-symbol noncoherent
observation model: the receiver correlates against the two tone waveforms,
the carrier phase is unknown and uniform per hop, and the two matched-filter
outputs (expressed in an orthonormal basis, so their noise components are
independent unit-variance complex Gaussians) feed phase-averaged
likelihoods proportional to I0(2 sqrt(gamma) |<v_b, y>|).  The estimated
grid is made monotone in gamma (pool-adjacent-violators) before any
inversion and can be persisted to / loaded from a plain-text table.
"""

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import i0e

__all__ = [
    "LinkConfig",
    "CapacityModel",
    "symmetric_rate",
    "sinr_threshold",
    "spectral_efficiency",
    "cpfsk_psd",
    "occupied_bandwidth",
]

_H_MIN, _H_MAX = 0.0, 1.5


@dataclass(frozen=True)
class LinkConfig:
    """Code rate, modulation index, margin and hopping for one link design."""

    R: float
    h: float
    L_eff: float
    margin_db: float = 0.0
    B: float | None = None
    D: float = 1.0

    def __post_init__(self):
        if not 0 < self.R < 1:
            raise ValueError("code rate must lie in (0, 1)")
        if not _H_MIN < self.h <= _H_MAX:
            raise ValueError(f"modulation index must lie in ({_H_MIN}, {_H_MAX}]")
        if self.L_eff < 1:
            raise ValueError("equivalent channel count must be >= 1")
        if self.margin_db < 0:
            raise ValueError("margin must be nonnegative")
        if self.B is not None and self.B <= 0:
            raise ValueError("bandwidth must be positive")
        if not 0 < self.D <= 1:
            raise ValueError("duty factor must lie in (0, 1]")


def _isotonic_nondecreasing(y: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators fit: closest nondecreasing sequence to y."""
    values = list(map(float, y))
    weights = [1.0] * len(values)
    blocks = []
    for v, w in zip(values, weights):
        blocks.append([v, w])
        while len(blocks) > 1 and blocks[-2][0] > blocks[-1][0]:
            v1, w1 = blocks.pop()
            v0, w0 = blocks.pop()
            blocks.append([(v0 * w0 + v1 * w1) / (w0 + w1), w0 + w1])
    out = []
    for v, w in blocks:
        out.extend([v] * int(w))
    return np.asarray(out)


def symmetric_rate(h: float, gamma_db: float, trials: int = 100000,
                   seed: int = 0) -> float:
    """Monte Carlo estimate of the binary CPFSK symmetric information rate.

    gamma_db is the per-symbol SINR Es/N0 in dB.  The estimate is the mutual
    information (bits/symbol) between equiprobable tone choices and the
    noncoherent correlator pair, clipped to [0, 1].
    """
    if not _H_MIN < h <= _H_MAX:
        raise ValueError(f"modulation index must lie in ({_H_MIN}, {_H_MAX}]")
    if trials < 1:
        raise ValueError("need at least one trial")
    gamma = 10.0 ** (gamma_db / 10.0)
    root_g = math.sqrt(gamma)
    r = abs(np.sinc(h))  # |correlation| of the two unit-energy tones
    cross = math.sqrt(max(1.0 - r * r, 0.0))

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=int(seed))))
    x = rng.random(trials) < 0.5
    theta = rng.uniform(0.0, 2.0 * np.pi, trials)
    phase = np.exp(1j * theta)
    n0 = (rng.standard_normal(trials) + 1j * rng.standard_normal(trials)) / np.sqrt(2.0)
    n1 = (rng.standard_normal(trials) + 1j * rng.standard_normal(trials)) / np.sqrt(2.0)

    # v0 = (1, 0), v1 = (r, cross) in the orthonormal tone basis
    y0 = root_g * phase * np.where(x, r, 1.0) + n0
    y1 = root_g * phase * np.where(x, cross, 0.0) + n1
    z_v0 = np.abs(y0)
    z_v1 = np.abs(r * y0 + cross * y1)

    def log_i0(w):
        return np.log(i0e(w)) + w

    llr_sent = log_i0(2.0 * root_g * np.where(x, z_v1, z_v0))
    llr_other = log_i0(2.0 * root_g * np.where(x, z_v0, z_v1))
    bits = 1.0 - np.logaddexp(0.0, llr_other - llr_sent) / math.log(2.0)
    return float(np.clip(bits.mean(), 0.0, 1.0))


@dataclass(frozen=True)
class CapacityModel:
    """Tabulated symmetric information rate on an (h, gamma_dB) grid.

    rate[i, j] = C(h_grid[i], gamma_db_grid[j]), nondecreasing in j.
    """

    h_grid: np.ndarray
    gamma_db_grid: np.ndarray
    rate: np.ndarray
    source: str = "estimated"
    symbols: int = 0
    seed: int = 0

    def __post_init__(self):
        h = np.asarray(self.h_grid, dtype=float)
        g = np.asarray(self.gamma_db_grid, dtype=float)
        r = np.asarray(self.rate, dtype=float)
        object.__setattr__(self, "h_grid", h)
        object.__setattr__(self, "gamma_db_grid", g)
        object.__setattr__(self, "rate", r)
        if h.ndim != 1 or g.ndim != 1 or r.shape != (h.size, g.size):
            raise ValueError("rate grid shape must be (len(h_grid), len(gamma_db_grid))")
        if np.any(np.diff(h) <= 0) or np.any(np.diff(g) <= 0):
            raise ValueError("grids must be strictly increasing")
        if np.any((r < 0) | (r > 1)):
            raise ValueError("rates must lie in [0, 1]")
        if np.any(np.diff(r, axis=1) < -1e-12):
            raise ValueError("rate rows must be nondecreasing in gamma")

    @classmethod
    def estimate(cls, h_grid=None, gamma_db_grid=None, symbols: int = 100000,
                 seed: int = 20260810, threads: int = 1) -> "CapacityModel":
        """Estimate the grid by Monte Carlo, one independent stream per cell."""
        h_grid = np.round(np.arange(0.40, 1.0001, 0.05), 10) if h_grid is None else np.asarray(h_grid, dtype=float)
        gamma_db_grid = (np.round(np.arange(-10.0, 20.0001, 0.25), 10)
                         if gamma_db_grid is None else np.asarray(gamma_db_grid, dtype=float))

        def row(i):
            out = np.empty(gamma_db_grid.size)
            for j, gdb in enumerate(gamma_db_grid):
                cell_seed = np.random.SeedSequence(entropy=int(seed), spawn_key=(i, j))
                out[j] = symmetric_rate(float(h_grid[i]), float(gdb), symbols,
                                        seed=cell_seed.generate_state(1)[0])
            return _isotonic_nondecreasing(out)

        if threads == 1:
            rows = [row(i) for i in range(h_grid.size)]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                rows = list(pool.map(row, range(h_grid.size)))
        return cls(h_grid=h_grid, gamma_db_grid=gamma_db_grid,
                   rate=np.vstack(rows), source="estimated",
                   symbols=symbols, seed=seed)

    def rate_curve(self, h: float) -> np.ndarray:
        """C(h, .) over gamma_db_grid, linearly interpolated across h."""
        hg = self.h_grid
        if h < hg[0] - 1e-9 or h > hg[-1] + 1e-9:
            raise ValueError(f"h={h} outside the model grid [{hg[0]}, {hg[-1]}]")
        h = min(max(h, hg[0]), hg[-1])
        j = int(np.searchsorted(hg, h, side="right") - 1)
        j = min(max(j, 0), hg.size - 2)
        w = (h - hg[j]) / (hg[j + 1] - hg[j])
        return (1.0 - w) * self.rate[j] + w * self.rate[j + 1]

    def rate_at(self, h: float, gamma_db: float) -> float:
        curve = self.rate_curve(h)
        return float(np.interp(gamma_db, self.gamma_db_grid, curve))

    def _payload_lines(self):
        lines = ["h_grid " + " ".join(repr(float(v)) for v in self.h_grid),
                 "gamma_db_grid " + " ".join(repr(float(v)) for v in self.gamma_db_grid)]
        for row in self.rate:
            lines.append(" ".join(repr(float(v)) for v in row))
        return lines

    def checksum(self) -> str:
        payload = "\n".join(self._payload_lines()) + "\n"
        return hashlib.sha256(payload.encode("ascii")).hexdigest()

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("# binary CPFSK symmetric information rate grid\n")
            fh.write(f"# source = {self.source}\n")
            fh.write(f"# symbols = {self.symbols}\n")
            fh.write(f"# seed = {self.seed}\n")
            fh.write(f"# sha256 = {self.checksum()}\n")
            for line in self._payload_lines():
                fh.write(line + "\n")

    @classmethod
    def load(cls, path) -> "CapacityModel":
        meta = {}
        payload = []
        with open(path, "r", encoding="ascii") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                if line.startswith("#"):
                    key, _, value = line.lstrip("# ").partition("=")
                    meta[key.strip()] = value.strip()
                    continue
                payload.append(line)
        if len(payload) < 3 or not payload[0].startswith("h_grid ") \
                or not payload[1].startswith("gamma_db_grid "):
            raise ValueError("malformed capacity table: expected h-grid and gamma-grid header rows")
        expected = meta.get("sha256")
        if expected is not None:
            actual = hashlib.sha256(("\n".join(payload) + "\n").encode("ascii")).hexdigest()
            if actual != expected:
                raise ValueError("capacity table checksum mismatch (file corrupted?)")
        h_grid = np.array([float(v) for v in payload[0].split()[1:]])
        gamma_db_grid = np.array([float(v) for v in payload[1].split()[1:]])
        rate = np.array([[float(v) for v in line.split()] for line in payload[2:]])
        return cls(h_grid=h_grid, gamma_db_grid=gamma_db_grid, rate=rate,
                   source=meta.get("source", "tabulated"),
                   symbols=int(meta.get("symbols", 0)),
                   seed=int(meta.get("seed", 0)))

    @classmethod
    def default(cls) -> "CapacityModel":
        """Model shipped with the package (pre-estimated, checksummed)."""
        from importlib.resources import files

        return cls.load(files("fhnet.data").joinpath("cpfsk_capacity.txt"))


def sinr_threshold(h: float, R: float, margin_db: float,
                   model: CapacityModel) -> float:
    """SINR threshold beta (dB): the SNR where C(h, gamma) first reaches R.

    Inverts the model's monotone piecewise-linear rate curve; margin_db is
    added to the capacity-limit threshold to account for practical codes.
    """
    if not 0 < R < 1:
        raise ValueError("code rate must lie in (0, 1)")
    curve = model.rate_curve(h)
    grid = model.gamma_db_grid
    if R < curve[0] or R > curve[-1]:
        raise ValueError(
            f"rate {R} not bracketed by the model (C spans [{curve[0]:.4f}, {curve[-1]:.4f}] "
            f"over [{grid[0]}, {grid[-1]}] dB at h={h})")
    j = int(np.searchsorted(curve, R, side="left"))
    if j == 0:
        return float(grid[0] + margin_db)
    c0, c1 = curve[j - 1], curve[j]
    if c1 == c0:
        gamma = grid[j - 1]
    else:
        gamma = grid[j - 1] + (R - c0) / (c1 - c0) * (grid[j] - grid[j - 1])
    return float(gamma + margin_db)


def cpfsk_psd(nu, h: float):
    """Baseband PSD of binary full-response CPFSK at normalized frequency nu.

    nu is frequency times symbol duration; the spectrum is normalized so its
    integral over the real line is the (unit) signal power.  Valid for
    non-integer h, where the spectrum has no discrete lines.
    """
    nu = np.asarray(nu, dtype=float)
    psi = math.cos(math.pi * h)
    a1 = np.sinc(nu + h / 2.0)
    a2 = np.sinc(nu - h / 2.0)
    cos2 = np.cos(2.0 * np.pi * nu)
    den = 1.0 + psi * psi - 2.0 * psi * cos2
    alpha11 = -math.pi * h
    alpha22 = math.pi * h
    b11 = (np.cos(2.0 * np.pi * nu - alpha11) - psi * math.cos(alpha11)) / den
    b22 = (np.cos(2.0 * np.pi * nu - alpha22) - psi * math.cos(alpha22)) / den
    b12 = (cos2 - psi) / den
    return 0.5 * (a1 * a1 + a2 * a2) + 0.5 * (b11 * a1 * a1 + 2.0 * b12 * a1 * a2
                                              + b22 * a2 * a2)


def _effective_index(h: float) -> float:
    # integer h produces true spectral lines; step just off the singular
    # point, where the (integrable) near-line peaks carry the same mass
    nearest = round(h)
    if nearest >= 1 and abs(h - nearest) < 0.01:
        return nearest - 0.01 if h <= nearest else nearest + 0.01
    return h


@lru_cache(maxsize=256)
def occupied_bandwidth(h: float, power_fraction: float = 0.99) -> float:
    """Two-sided bandwidth (in symbol rates) holding `power_fraction` of the power."""
    if not _H_MIN < h <= _H_MAX:
        raise ValueError(f"modulation index must lie in ({_H_MIN}, {_H_MAX}]")
    if not 0 < power_fraction < 1:
        raise ValueError("power fraction must lie in (0, 1)")
    he = _effective_index(h)
    peak = he / 2.0

    def psd(nu):
        return cpfsk_psd(nu, he)

    def piece(lo, hi):
        pts = [peak] if lo < peak < hi else None
        val, _ = quad(psd, lo, hi, points=pts, limit=400)
        return val

    half_total = piece(0.0, 2.0) + piece(2.0, 16.0) + piece(16.0, 256.0)

    def cumulative(b):
        if b <= 2.0:
            return piece(0.0, b)
        if b <= 16.0:
            return piece(0.0, 2.0) + piece(2.0, b)
        return piece(0.0, 2.0) + piece(2.0, 16.0) + piece(16.0, b)

    target = power_fraction * half_total
    b_half = brentq(lambda b: cumulative(b) - target, 1e-6, 255.0, xtol=1e-10)
    return 2.0 * b_half


def total_psd_power(h: float) -> float:
    """Integral of the PSD over the real line (should be 1)."""
    he = _effective_index(h)
    peak = he / 2.0
    total = 0.0
    for lo, hi in ((0.0, 2.0), (2.0, 16.0), (16.0, 256.0)):
        pts = [peak] if lo < peak < hi else None
        val, _ = quad(lambda nu: cpfsk_psd(nu, he), lo, hi, points=pts, limit=400)
        total += val
    return 2.0 * total


def spectral_efficiency(h: float, power_fraction: float = 0.99) -> float:
    """Symbols per second per Hz: inverse of the occupied bandwidth."""
    return 1.0 / occupied_bandwidth(h, power_fraction)
