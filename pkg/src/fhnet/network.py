"""Finite network geometry and normalized received powers.

The network consists of a receiver at the origin, a source transmitter at a
fixed distance, and M interferers placed uniformly over an annulus around the
receiver.  Received powers are normalized to the source transmit power at
unit distance: interferer i contributes

    Omega_i = (1/c_i) * 10^(xi_i/10) * ||X_i||^(-alpha)

with c_i the transmit-power ratio P0/Pi and xi_i an optional log-normal
shadowing draw (standard deviation sigma_s dB).  The source term Omega_0
omits the power ratio.  All distances are in units of the path-loss
reference distance.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Topology",
    "ChannelParams",
    "HoppingParams",
    "NormalizedPowers",
    "sample_topology",
    "normalized_powers",
    "save_topology",
    "load_topology",
]


@dataclass(frozen=True)
class Topology:
    """Receiver-centred network snapshot.

    interferer_positions is an (M, 2) array; all radii must lie inside the
    annulus [r_ex, r_net].
    """

    source_distance: float
    interferer_positions: np.ndarray
    r_ex: float
    r_net: float

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.interferer_positions, dtype=float))
        if pos.size == 0:
            pos = pos.reshape(0, 2)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("interferer_positions must be an (M, 2) array")
        object.__setattr__(self, "interferer_positions", pos)
        if self.source_distance <= 0:
            raise ValueError("source_distance must be positive")
        if self.r_ex < 0 or self.r_net <= self.r_ex:
            raise ValueError(
                f"invalid annulus: need r_net > r_ex >= 0, got r_ex={self.r_ex}, r_net={self.r_net}"
            )
        r = self.distances
        if r.size and (r.min() < self.r_ex - 1e-12 or r.max() > self.r_net + 1e-12):
            raise ValueError("interferer positions fall outside the annulus")

    @property
    def num_interferers(self) -> int:
        return self.interferer_positions.shape[0]

    @property
    def distances(self) -> np.ndarray:
        """Distances ||X_i|| from each interferer to the receiver."""
        return np.hypot(self.interferer_positions[:, 0], self.interferer_positions[:, 1])


@dataclass(frozen=True)
class ChannelParams:
    """Path loss, fading and shadowing parameters.

    m holds the Nakagami shape parameters [m_0, m_1, ..., m_M] (source
    first); power_ratios holds c_i = P0/Pi for the M interferers.
    """

    alpha: float
    m: np.ndarray
    sigma_s: float = 0.0
    power_ratios: np.ndarray | None = None
    d0: float = 1.0

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.m, dtype=float))
        object.__setattr__(self, "m", m)
        if self.alpha <= 2:
            raise ValueError(f"path-loss exponent must exceed 2, got {self.alpha}")
        if m.size < 1 or np.any(m < 0.5):
            raise ValueError("Nakagami parameters must all be >= 0.5")
        m0 = m[0]
        if abs(m0 - round(m0)) > 1e-9 or m0 < 1:
            raise ValueError(
                f"m0 must be a positive integer (closed form restriction), got {m0}"
            )
        if self.sigma_s < 0:
            raise ValueError("sigma_s must be nonnegative")
        if self.power_ratios is not None:
            c = np.atleast_1d(np.asarray(self.power_ratios, dtype=float))
            if np.any(c <= 0):
                raise ValueError("power ratios c_i must be positive")
            object.__setattr__(self, "power_ratios", c)
        if self.d0 <= 0:
            raise ValueError("reference distance must be positive")

    @property
    def m0(self) -> int:
        return int(round(self.m[0]))

    def ratios_for(self, m_interferers: int) -> np.ndarray:
        if self.power_ratios is None:
            return np.ones(m_interferers)
        c = self.power_ratios
        if c.size == 1:
            return np.full(m_interferers, c[0])
        if c.size != m_interferers:
            raise ValueError(f"expected {m_interferers} power ratios, got {c.size}")
        return c

    @classmethod
    def homogeneous(cls, alpha, m0, m_i, n_interferers, sigma_s=0.0, c=1.0):
        """All interferers share the Nakagami parameter m_i and ratio c."""
        m = np.concatenate(([float(m0)], np.full(n_interferers, float(m_i))))
        return cls(alpha=alpha, m=m, sigma_s=sigma_s, power_ratios=np.array([c]))


@dataclass(frozen=True)
class HoppingParams:
    """Frequency-hopping parameters: L channels, duty factor D.

    The collision probability seen from each interferer is p_i = D/L = 1/L',
    with L' = L/D the equivalent number of channels.
    """

    L: float
    D: float = 1.0

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("number of channels must be >= 1")
        if not 0 < self.D <= 1:
            raise ValueError("duty factor must lie in (0, 1]")

    @property
    def L_eff(self) -> float:
        return self.L / self.D

    @property
    def p(self) -> float:
        return self.D / self.L

    @classmethod
    def from_equivalent_channels(cls, L_eff: float):
        if L_eff < 1:
            raise ValueError("equivalent channel count must be >= 1")
        return cls(L=float(L_eff), D=1.0)

    def collision_probabilities(self, m_interferers: int) -> np.ndarray:
        return np.full(m_interferers, self.p)


@dataclass(frozen=True)
class NormalizedPowers:
    """Normalized powers [Omega_0, Omega_1, ..., Omega_M] (source first)."""

    omega: np.ndarray = field(default_factory=lambda: np.ones(1))

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.omega, dtype=float))
        object.__setattr__(self, "omega", w)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("normalized powers must be finite and nonnegative")

    @property
    def source(self) -> float:
        return float(self.omega[0])

    @property
    def interferers(self) -> np.ndarray:
        return self.omega[1:]


def _warn_near_field(topology: Topology) -> None:
    if topology.source_distance < 1.0 or (topology.num_interferers and topology.r_ex < 1.0):
        warnings.warn(
            "distances below the reference distance extrapolate the attenuation "
            "power law into the near field",
            stacklevel=3,
        )


def sample_topology(M: int, r_ex: float, r_net: float, source_distance: float,
                    seed: int) -> Topology:
    """Draw M interferer positions i.i.d. uniform over the annulus.

    Uses the inverse cdf of the uniform-area radius law,
    r = sqrt(r_ex^2 + U*(r_net^2 - r_ex^2)), plus a uniform angle, so the
    draw is deterministic given the seed.
    """
    if M < 0:
        raise ValueError("interferer count must be nonnegative")
    if r_ex < 0 or r_net <= r_ex:
        raise ValueError(
            f"invalid annulus: need r_net > r_ex >= 0, got r_ex={r_ex}, r_net={r_net}"
        )
    rng = np.random.default_rng(seed)
    u = rng.random(M)
    radii = np.sqrt(r_ex ** 2 + u * (r_net ** 2 - r_ex ** 2))
    theta = rng.uniform(0.0, 2.0 * np.pi, M)
    pos = np.column_stack((radii * np.cos(theta), radii * np.sin(theta)))
    top = Topology(source_distance=source_distance, interferer_positions=pos,
                   r_ex=r_ex, r_net=r_net)
    _warn_near_field(top)
    return top


def normalized_powers(top: Topology, ch: ChannelParams, seed: int = 0) -> NormalizedPowers:
    """Normalized powers for a topology, including shadowing draws.

    With sigma_s = 0 the result is the deterministic power law
    Omega_i = ||X_i||^(-alpha) / c_i (and Omega_0 = ||X_0||^(-alpha)); with
    shadowing, each entry additionally carries an independent factor
    10^(xi/10), xi ~ N(0, sigma_s^2), applied to the source as well.
    """
    M = top.num_interferers
    if ch.m.size != M + 1:
        raise ValueError(f"expected {M + 1} Nakagami parameters, got {ch.m.size}")
    c = ch.ratios_for(M)
    dist = np.concatenate(([top.source_distance], top.distances))
    omega = dist ** (-ch.alpha)
    omega[1:] /= c
    if ch.sigma_s > 0:
        rng = np.random.default_rng(seed)
        xi = ch.sigma_s * rng.standard_normal(M + 1)
        omega = omega * 10.0 ** (xi / 10.0)
    return NormalizedPowers(omega=omega)


def save_topology(top: Topology, path) -> None:
    """Write a topology as a plain-text table, one interferer per line (x, y)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# source_distance = {top.source_distance!r}\n")
        fh.write(f"# r_ex = {top.r_ex!r}\n")
        fh.write(f"# r_net = {top.r_net!r}\n")
        for x, y in top.interferer_positions:
            fh.write(f"{float(x)!r} {float(y)!r}\n")


def load_topology(path) -> Topology:
    """Read a topology written by `save_topology`."""
    meta = {}
    points = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line.lstrip("# ").partition("=")
                meta[key.strip()] = float(value.strip())
                continue
            x, y = line.split()
            points.append((float(x), float(y)))
    missing = {"source_distance", "r_ex", "r_net"} - meta.keys()
    if missing:
        raise ValueError(f"topology file missing header fields: {sorted(missing)}")
    pos = np.asarray(points, dtype=float).reshape(len(points), 2)
    return Topology(source_distance=meta["source_distance"], interferer_positions=pos,
                    r_ex=meta["r_ex"], r_net=meta["r_net"])
