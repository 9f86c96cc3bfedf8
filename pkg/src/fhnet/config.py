"""Scenario configuration for the command-line tools.

A scenario is a flat, human-readable key = value document; `#` starts a
comment.  List values accept comma separation ("0,2,4,8") or inclusive
range syntax ("1:50" or "-10:20:0.25").  Unknown keys are rejected, and
command-line flags override file values.
"""

from dataclasses import dataclass, fields, replace

from .common import ConfigError

__all__ = ["ScenarioConfig", "parse_value", "load_config"]


def _parse_list(text: str, elem):
    text = text.strip()
    if ":" in text:
        parts = [p.strip() for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise ConfigError(f"bad range syntax {text!r} (use lo:hi or lo:hi:step)")
        lo, hi = float(parts[0]), float(parts[1])
        step = float(parts[2]) if len(parts) == 3 else 1.0
        if step <= 0 or hi < lo:
            raise ConfigError(f"bad range {text!r}")
        out = []
        v = lo
        while v <= hi + 1e-9:
            out.append(elem(round(v, 10)))
            v += step
        return out
    return [elem(float(p)) if elem is not str else p.strip()
            for p in text.split(",") if p.strip() != ""]


def parse_value(text: str, target_type):
    """Parse one config value according to the declared field type."""
    text = text.strip()
    if target_type is bool:
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}")
    if target_type is int:
        return int(float(text))
    if target_type is float:
        return float(text)
    if target_type is str:
        return text
    if target_type == "list_int":
        return _parse_list(text, int)
    if target_type == "list_float":
        return _parse_list(text, float)
    raise ConfigError(f"unsupported config type {target_type!r}")


_LIST_INT_FIELDS = {"m_grid"}
_LIST_FLOAT_FIELDS = {"gamma_db_grid", "l_eff_grid", "sigma_s_grid",
                      "tc_l_eff_grid", "tc_r_grid", "tc_h_grid",
                      "capacity_h_grid", "capacity_gamma_grid"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Every knob a run can use; commands read the subset they need."""

    # network geometry and channel
    m_interferers: int = 50
    r_ex: float = 0.25
    r_net: float = 4.0
    source_distance: float = 1.0
    alpha: float = 3.0
    m0: int = 1
    m_i: float = 1.0
    sigma_s: float = 0.0
    power_ratio: float = 1.0
    topology_seed: int = 1
    topology_file: str = ""
    shadowing_seed: int = 2

    # link and hopping
    l_eff: float = 200.0
    code_rate: float = 0.5
    mod_index: float = 1.0
    margin_db: float = 0.0
    beta_db: float = float("nan")  # NaN = derive from the capacity model
    bandwidth_hz: float = 0.0

    # SNR
    gamma_db: float = 10.0
    gamma_db_grid: list = None

    # Monte Carlo budgets
    trials: int = 1000000
    mc_seed: int = 1234
    shadow_draws: int = 10000
    shadow_seed: int = 99

    # sweep grids
    m_grid: list = None
    l_eff_grid: list = None
    sigma_s_grid: list = None
    tc_l_eff_grid: list = None
    tc_r_grid: list = None
    tc_h_grid: list = None

    # optimizer
    opt_l_lo: float = 2.0
    opt_l_hi: float = 400.0
    opt_r_lo: float = 0.05
    opt_r_hi: float = 0.95
    opt_h_lo: float = 0.40
    opt_h_hi: float = 1.00
    opt_tol_l: float = 1.0
    opt_tol_r: float = 0.01
    opt_tol_h: float = 0.01
    opt_max_cycles: int = 200
    opt_shadow_draws: int = 2000
    opt_final_multiplier: int = 10
    report_margin_db: float = 1.0

    # capacity model
    capacity_file: str = ""
    capacity_symbols: int = 100000
    capacity_seed: int = 20260810
    capacity_h_grid: list = None
    capacity_gamma_grid: list = None

    # output
    out_dir: str = "out"
    label: str = "run"
    plot: bool = True

    def __post_init__(self):
        defaults = {
            "gamma_db_grid": [0.0, 5.0, 10.0, 15.0, 20.0],
            "m_grid": list(range(1, 51)),
            "l_eff_grid": [50.0, 200.0],
            "sigma_s_grid": [0.0, 2.0, 4.0, 8.0],
            "tc_l_eff_grid": [25.0, 50.0, 100.0, 200.0, 400.0],
            "tc_r_grid": [round(0.2 + 0.1 * k, 10) for k in range(8)],
            "tc_h_grid": [0.59, 1.0],
            "capacity_h_grid": [round(0.40 + 0.05 * k, 10) for k in range(13)],
            "capacity_gamma_grid": [round(-10.0 + 0.25 * k, 10) for k in range(121)],
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        self._check()

    def _check(self):
        if self.m_interferers < 0:
            raise ConfigError("m_interferers must be nonnegative")
        if self.r_ex < 0 or self.r_net <= self.r_ex:
            raise ConfigError("need r_net > r_ex >= 0")
        if self.source_distance <= 0:
            raise ConfigError("source_distance must be positive")
        if self.alpha <= 2:
            raise ConfigError("alpha must exceed 2")
        if self.m0 < 1:
            raise ConfigError("m0 must be a positive integer")
        if self.m_i < 0.5:
            raise ConfigError("m_i must be >= 0.5")
        if self.sigma_s < 0:
            raise ConfigError("sigma_s must be nonnegative")
        if self.power_ratio <= 0:
            raise ConfigError("power_ratio must be positive")
        if self.l_eff < 1:
            raise ConfigError("l_eff must be >= 1")
        if not 0 < self.code_rate < 1:
            raise ConfigError("code_rate must lie in (0, 1)")
        if not 0 < self.mod_index <= 1.5:
            raise ConfigError("mod_index must lie in (0, 1.5]")
        if self.margin_db < 0:
            raise ConfigError("margin_db must be nonnegative")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.shadow_draws < 100:
            raise ConfigError("shadow_draws must be at least 100")
        if any(L < 1 for L in self.l_eff_grid + self.tc_l_eff_grid):
            raise ConfigError("all L' values must be >= 1")
        if any(s < 0 for s in self.sigma_s_grid):
            raise ConfigError("sigma_s values must be nonnegative")
        if any(m < 0 for m in self.m_grid):
            raise ConfigError("m_grid values must be nonnegative")
        if not (self.opt_l_lo < self.opt_l_hi and self.opt_r_lo < self.opt_r_hi
                and self.opt_h_lo < self.opt_h_hi):
            raise ConfigError("optimizer bounds must satisfy lo < hi")
        if min(self.opt_tol_l, self.opt_tol_r, self.opt_tol_h) <= 0:
            raise ConfigError("optimizer tolerances must be positive")

    def field_type(self, name: str):
        if name in _LIST_INT_FIELDS:
            return "list_int"
        if name in _LIST_FLOAT_FIELDS:
            return "list_float"
        for f in fields(self):
            if f.name == name:
                return f.type if isinstance(f.type, type) else {"int": int, "float": float,
                                                                "str": str, "bool": bool}[f.type]
        raise ConfigError(f"unknown configuration key {name!r}")

    def with_overrides(self, **overrides) -> "ScenarioConfig":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        return replace(self, **overrides)

    def echo_items(self):
        """(key, value) pairs for reproducibility headers, sorted by key."""
        out = []
        for f in sorted(fields(self), key=lambda f: f.name):
            v = getattr(self, f.name)
            if isinstance(v, list):
                v = ",".join(repr(x) for x in v)
            out.append((f.name, v))
        return out


def load_config(path=None, **overrides) -> ScenarioConfig:
    """Build a ScenarioConfig from an optional file plus explicit overrides."""
    values = {}
    base = ScenarioConfig()
    if path:
        known = {f.name for f in fields(ScenarioConfig)}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                key = key.strip()
                if key not in known:
                    raise ConfigError(f"{path}:{lineno}: unknown configuration key {key!r}")
                values[key] = parse_value(value, base.field_type(key))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return base.with_overrides(**values)
