"""Joint maximization of the normalized transmission capacity over (L', R, h).

Coordinate search with shrinking intervals: each coordinate keeps a bracket
(lo, mid, hi); the objective is probed at all three points, the midpoint
moves halfway toward an endpoint that beats it (the new bracket is then
exactly [old mid, endpoint]), or, if the midpoint is already best, the
bracket shrinks symmetrically to half its width.  Coordinates are cycled in
the fixed order L' -> R -> h until no midpoint moves and every
endpoint-to-midpoint gap has reached its tolerance.  L' is searched over
integers (midpoint ties round toward the smaller value).

The objective is deterministic for a fixed run seed (the shadowed outage
reuses one set of source-shadowing draws across all probes), so interval
comparisons are well defined; the reported optimum is re-evaluated at a
larger draw budget.  Every probed point is cached and the reported best is
the argmax over all probes, so the incumbent never decreases.
"""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .averaged import AveragedOutageInput, averaged_outage_shadowed, averaged_outage_unshadowed
from .common import NumericalError, db_to_linear
from .cpfsk import CapacityModel, sinr_threshold, spectral_efficiency
from .tc import interferer_density

__all__ = [
    "SearchInterval",
    "OptimizationReport",
    "evaluate_objective",
    "optimize",
]

DEFAULT_BOUNDS = ((2.0, 400.0), (0.05, 0.95), (0.40, 1.00))
DEFAULT_TOLERANCES = (1.0, 0.01, 0.01)
_COORD_NAMES = ("L_eff", "R", "h")


@dataclass
class SearchInterval:
    """One coordinate's bracket and shrink state."""

    lo: float
    mid: float
    hi: float
    tol: float
    integer: bool = False
    bound_lo: float = -math.inf
    bound_hi: float = math.inf

    def __post_init__(self):
        if not self.lo <= self.mid <= self.hi:
            raise ValueError("need lo <= mid <= hi")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.integer:
            self.lo, self.mid, self.hi = (self._round_down(self.lo),
                                          self._round_mid(self.mid),
                                          self._round_up(self.hi))

    @staticmethod
    def _round_mid(x):
        return float(math.ceil(x - 0.5))  # ties toward the smaller value

    @staticmethod
    def _round_down(x):
        return float(math.floor(x))

    @staticmethod
    def _round_up(x):
        return float(math.ceil(x))

    @property
    def gaps_at_tolerance(self) -> bool:
        return (self.mid - self.lo) <= self.tol + 1e-12 and (self.hi - self.mid) <= self.tol + 1e-12

    def update(self, f_lo: float, f_mid: float, f_hi: float) -> bool:
        """Apply one probe outcome; returns True if the midpoint moved."""
        if f_hi > f_lo:
            endpoint, f_end = self.hi, f_hi
        else:
            endpoint, f_end = self.lo, f_lo
        old_mid = self.mid
        if f_end > f_mid:
            new_mid = 0.5 * (self.mid + endpoint)
            new_lo, new_hi = sorted((self.mid, endpoint))
        else:
            half = 0.25 * (self.hi - self.lo)
            new_mid = self.mid
            new_lo, new_hi = self.mid - half, self.mid + half
        if self.integer:
            new_mid = self._round_mid(new_mid)
            new_lo = self._round_down(new_lo)
            new_hi = self._round_up(new_hi)
        # keep the bracket at least one tolerance wide on each side, inside bounds
        new_lo = max(self.bound_lo, min(new_lo, new_mid - self.tol))
        new_hi = min(self.bound_hi, max(new_hi, new_mid + self.tol))
        new_mid = min(max(new_mid, new_lo), new_hi)
        self.lo, self.mid, self.hi = new_lo, new_mid, new_hi
        return self.mid != old_mid


@dataclass
class OptimizationReport:
    """Converged operating point plus bookkeeping for reproducibility."""

    L_eff: int
    R: float
    h: float
    tau_opt: float
    tau_with_margin: float
    tau_opt_search: float
    beta_db: float
    epsilon: float
    evaluations: int
    cycles: int
    converged: bool
    boundary_warning: bool
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "L_eff": self.L_eff,
            "R": self.R,
            "h": self.h,
            "tau_opt_per_khz": 1000.0 * self.tau_opt,
            "tau_with_margin_per_khz": 1000.0 * self.tau_with_margin,
            "tau_opt_search_per_khz": 1000.0 * self.tau_opt_search,
            "beta_db": self.beta_db,
            "epsilon": self.epsilon,
            "evaluations": self.evaluations,
            "cycles": self.cycles,
            "converged": self.converged,
            "boundary_warning": self.boundary_warning,
        }

    def table_row(self, label: str = "") -> str:
        return (f"{label:24s} L'={self.L_eff:4d}  R={self.R:5.2f}  h={self.h:5.2f}  "
                f"tau'_opt={1000.0 * self.tau_opt:7.2f}  tau'_1={1000.0 * self.tau_with_margin:7.2f}  "
                f"[bps/kHz-m^2]")


def evaluate_objective(L_eff: float, R: float, h: float,
                       network: AveragedOutageInput, margin_db: float,
                       capacity: CapacityModel, shadow_draws: int = 2000,
                       shadow_seed: int = 1, interp_points: int = 160):
    """Normalized transmission capacity at one (L', R, h) point.

    Returns (tau_prime, beta_db, epsilon).  The SINR threshold comes from
    inverting the capacity model at (h, R) plus margin; the outage is the
    spatially averaged value at that threshold and collision probability
    1/L'.
    """
    beta_db = sinr_threshold(h, R, margin_db, capacity)
    inp = network.with_hops_and_threshold(L_eff, float(db_to_linear(beta_db)))
    if inp.sigma_s == 0:
        eps = averaged_outage_unshadowed(inp)
    else:
        eps = averaged_outage_shadowed(inp, n_draws=shadow_draws, seed=shadow_seed,
                                       interp_points=interp_points).value
    lam = interferer_density(inp.M, inp.r_ex, inp.r_net)
    tau = lam * R * spectral_efficiency(h) * (1.0 - eps) / L_eff
    return tau, beta_db, eps


def optimize(network: AveragedOutageInput, capacity: CapacityModel,
             bounds=DEFAULT_BOUNDS, tolerances=DEFAULT_TOLERANCES,
             margin_db: float = 0.0, shadow_draws: int = 2000,
             shadow_seed: int = 1, max_cycles: int = 200,
             report_margin_db: float = 1.0, final_draw_multiplier: int = 10,
             objective=None) -> OptimizationReport:
    """Maximize tau'(L', R, h) by cyclic interval-shrinking coordinate search.

    network supplies everything but (beta, p), which are bound per probe.
    `objective` may replace the default evaluation (test hook): a callable
    (L_eff, R, h) -> tau.  Probes whose code rate is not bracketed by the
    capacity model count as infeasible (objective -inf) rather than aborting
    the search.
    """
    intervals = []
    for i, ((lo, hi), tol) in enumerate(zip(bounds, tolerances)):
        if not lo < hi:
            raise ValueError(f"invalid bounds for {_COORD_NAMES[i]}: ({lo}, {hi})")
        intervals.append(SearchInterval(lo=lo, mid=0.5 * (lo + hi), hi=hi, tol=tol,
                                        integer=(i == 0), bound_lo=lo, bound_hi=hi))

    cache: dict = {}
    stats = {"evals": 0}

    def eval_point(L_eff, R, h):
        key = (int(round(L_eff)), round(R, 9), round(h, 9))
        if key not in cache:
            stats["evals"] += 1
            if objective is not None:
                cache[key] = float(objective(key[0], R, h))
            else:
                try:
                    cache[key] = evaluate_objective(key[0], R, h, network, margin_db,
                                                    capacity, shadow_draws, shadow_seed)[0]
                except ValueError:
                    cache[key] = -math.inf
        return cache[key]

    trace = []
    incumbent = -math.inf
    converged = False
    cycles = 0
    for cycle in range(1, max_cycles + 1):
        cycles = cycle
        mids_before = [iv.mid for iv in intervals]
        any_moved = False
        for ci, iv in enumerate(intervals):
            point = [iv.mid for iv in intervals]

            def probe(v):
                pt = list(point)
                pt[ci] = v
                return eval_point(*pt)

            f_lo, f_mid, f_hi = probe(iv.lo), probe(iv.mid), probe(iv.hi)
            moved = iv.update(f_lo, f_mid, f_hi)
            any_moved = any_moved or moved
            incumbent = max(incumbent, f_lo, f_mid, f_hi)
            trace.append({"cycle": cycle, "coord": _COORD_NAMES[ci],
                          "lo": iv.lo, "mid": iv.mid, "hi": iv.hi,
                          "f_mid": f_mid, "incumbent": incumbent})
        mids_after = [iv.mid for iv in intervals]
        if (mids_before == mids_after and not any_moved
                and all(iv.gaps_at_tolerance for iv in intervals)):
            converged = True
            break
    if not converged:
        raise NumericalError(
            f"coordinate search did not converge within {max_cycles} cycles",
            last_estimate=trace,
        )

    best_key = max(cache, key=lambda k: cache[k])
    if not math.isfinite(cache[best_key]):
        raise NumericalError("no feasible point found within the search bounds",
                             last_estimate=trace)
    L_best, R_best, h_best = int(best_key[0]), float(best_key[1]), float(best_key[2])
    tau_search = cache[best_key]

    boundary = False
    for value, (lo, hi), tol in zip((L_best, R_best, h_best), bounds, tolerances):
        if value <= lo + tol or value >= hi - tol:
            boundary = True
    if boundary:
        warnings.warn("optimum sits at a search bound; widen the bounds", stacklevel=2)

    if objective is not None:
        tau_opt, beta_db, eps = tau_search, math.nan, math.nan
        tau_margin = math.nan
    else:
        tau_opt, beta_db, eps = evaluate_objective(
            L_best, R_best, h_best, network, margin_db, capacity,
            shadow_draws * final_draw_multiplier, shadow_seed)
        tau_margin, _, _ = evaluate_objective(
            L_best, R_best, h_best, network, margin_db + report_margin_db, capacity,
            shadow_draws * final_draw_multiplier, shadow_seed)

    return OptimizationReport(
        L_eff=L_best, R=R_best, h=h_best, tau_opt=tau_opt,
        tau_with_margin=tau_margin, tau_opt_search=tau_search,
        beta_db=beta_db, epsilon=eps, evaluations=stats["evals"],
        cycles=cycles, converged=converged, boundary_warning=boundary,
        trace=trace)
