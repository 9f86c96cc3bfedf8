"""Shared helpers: dB conversions, seeded RNG streams, error and result types."""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfigError",
    "NumericalError",
    "OutageResult",
    "db_to_linear",
    "linear_to_db",
    "chunk_rng",
]


class ConfigError(ValueError):
    """Invalid scenario configuration (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge (CLI exit code 3).

    Carries ``last_estimate`` when a partial result is available.
    """

    def __init__(self, message, last_estimate=None):
        super().__init__(message)
        self.last_estimate = last_estimate


@dataclass(frozen=True)
class OutageResult:
    """An outage probability plus how it was obtained.

    stderr is zero for closed forms; for Monte Carlo / semi-numerical paths
    it is the standard error of the reported value.
    """

    value: float
    stderr: float = 0.0
    method: str = ""
    trials: int | None = None
    seed: int | None = None


def db_to_linear(x_db):
    """Convert a dB quantity to linear scale."""
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    """Convert a linear power ratio to dB."""
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def chunk_rng(seed: int, chunk: int = 0) -> np.random.Generator:
    """Counter-based generator for chunk `chunk` of the stream keyed by `seed`.

    Distinct chunks give statistically independent streams, and the mapping
    (seed, chunk) -> stream is fixed, so chunked Monte Carlo reductions are
    reproducible regardless of how chunks are scheduled across workers.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(chunk),))
    return np.random.Generator(np.random.Philox(ss))
