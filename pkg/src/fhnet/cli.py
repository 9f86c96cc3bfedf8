"""Command-line front end.

Subcommands: outage-curve, avg-outage, tc-surface, optimize, capacity-table.
Each command reads a scenario config (file plus flag overrides), writes CSV
or JSON data with a reproducibility header (config echo, seeds, budgets,
code version -- everything needed to re-run bit-identically), and renders a
matching figure beside the data unless --no-plot is given.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  The
default worker count comes from the FHNET_THREADS environment variable.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .averaged import AveragedOutageInput, averaged_outage
from .common import ConfigError, NumericalError, db_to_linear
from .conditional import ConditionalOutageInput, conditional_outage
from .config import ScenarioConfig, load_config, parse_value
from .cpfsk import CapacityModel, sinr_threshold, spectral_efficiency
from .montecarlo import McConfig, mc_conditional_outage_curve
from .network import (ChannelParams, load_topology, normalized_powers,
                      sample_topology, save_topology)
from .optimizer import optimize
from .tc import interferer_density, normalized_tc

_ENV_THREADS = "FHNET_THREADS"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_table(path: Path, cfg: ScenarioConfig, extra: dict, columns, rows):
    """CSV with a '# key = value' reproducibility header; full precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# fhnet = {__version__}\n")
        for k, v in extra.items():
            fh.write(f"# {k} = {_fmt(v)}\n")
        for k, v in cfg.echo_items():
            fh.write(f"# {k} = {_fmt(v)}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _capacity_model(cfg: ScenarioConfig) -> CapacityModel:
    if cfg.capacity_file:
        return CapacityModel.load(cfg.capacity_file)
    return CapacityModel.default()


def _resolve_beta_db(cfg: ScenarioConfig, model: CapacityModel | None = None) -> float:
    if not math.isnan(cfg.beta_db):
        return cfg.beta_db
    model = model or _capacity_model(cfg)
    return sinr_threshold(cfg.mod_index, cfg.code_rate, cfg.margin_db, model)


def _network_input(cfg: ScenarioConfig, M: int, L_eff: float, sigma_s: float,
                   beta_db: float) -> AveragedOutageInput:
    return AveragedOutageInput.homogeneous(
        M=M, r_ex=cfg.r_ex, r_net=cfg.r_net, source_distance=cfg.source_distance,
        alpha=cfg.alpha, m0=cfg.m0, m_i=cfg.m_i, beta=float(db_to_linear(beta_db)),
        gamma_snr=float(db_to_linear(cfg.gamma_db)), L_eff=L_eff,
        c=cfg.power_ratio, sigma_s=sigma_s)


def cmd_outage_curve(cfg: ScenarioConfig, threads: int) -> list[Path]:
    """Conditional outage vs SNR for one fixed topology: closed form + oracle."""
    if not cfg.gamma_db_grid:
        raise ConfigError("gamma_db_grid is empty; nothing to sweep")
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    beta_db = _resolve_beta_db(cfg)
    beta = float(db_to_linear(beta_db))

    if cfg.topology_file:
        top = load_topology(cfg.topology_file)
    else:
        top = sample_topology(cfg.m_interferers, cfg.r_ex, cfg.r_net,
                              cfg.source_distance, cfg.topology_seed)
    ch = ChannelParams.homogeneous(cfg.alpha, cfg.m0, cfg.m_i, top.num_interferers,
                                   sigma_s=cfg.sigma_s, c=cfg.power_ratio)
    omega = normalized_powers(top, ch, cfg.shadowing_seed)
    p = np.full(top.num_interferers, 1.0 / cfg.l_eff)

    mc_cfg = McConfig(trials=cfg.trials, seed=cfg.mc_seed, mode="conditional",
                      threads=threads)
    mc = mc_conditional_outage_curve(omega.omega, ch.m, p, beta,
                                     cfg.gamma_db_grid, mc_cfg)
    rows = []
    for gdb, est in zip(cfg.gamma_db_grid, mc):
        inp = ConditionalOutageInput(omega.omega, ch.m, p, beta,
                                     float(db_to_linear(gdb)))
        rows.append((gdb, conditional_outage(inp), est.value, est.stderr))

    base = out_dir / f"{cfg.label}_outage_curve"
    topo_path = out_dir / f"{cfg.label}_topology.txt"
    save_topology(top, topo_path)
    csv_path = base.with_suffix(".csv")
    _write_table(csv_path, cfg, {"beta_db_used": beta_db, "mc_variance_reduction":
                                 "common random numbers across SNR points"},
                 ("gamma_db", "eps_closed", "eps_mc", "mc_stderr"), rows)
    written = [csv_path, topo_path]
    if cfg.plot:
        from .plots import outage_curve_figure

        fig_path = base.with_suffix(".png")
        outage_curve_figure(fig_path, [r[0] for r in rows], [r[1] for r in rows],
                            [r[2] for r in rows], [r[3] for r in rows],
                            label=cfg.label)
        written.append(fig_path)
    return written


def cmd_avg_outage(cfg: ScenarioConfig, threads: int) -> list[Path]:
    """Average outage over the (M, L', sigma_s) grid; closed form or semi-numerical."""
    if not cfg.m_grid or not cfg.l_eff_grid or not cfg.sigma_s_grid:
        raise ConfigError("m_grid, l_eff_grid and sigma_s_grid must be nonempty")
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    beta_db = _resolve_beta_db(cfg)

    rows = []
    for sigma in cfg.sigma_s_grid:
        for l_eff in cfg.l_eff_grid:
            for M in cfg.m_grid:
                inp = _network_input(cfg, M, l_eff, sigma, beta_db)
                res = averaged_outage(inp, n_draws=cfg.shadow_draws,
                                      seed=cfg.shadow_seed)
                rows.append((M, l_eff, sigma, res.value, res.stderr))

    base = out_dir / f"{cfg.label}_avg_outage"
    csv_path = base.with_suffix(".csv")
    _write_table(csv_path, cfg, {"beta_db_used": beta_db},
                 ("M", "L_eff", "sigma_s", "eps", "stderr"), rows)
    written = [csv_path]
    if cfg.plot:
        from .plots import avg_outage_figure

        fig_path = base.with_suffix(".png")
        avg_outage_figure(fig_path, rows, label=cfg.label)
        written.append(fig_path)
    return written


def cmd_tc_surface(cfg: ScenarioConfig, threads: int) -> list[Path]:
    """Normalized transmission capacity over the (L', R, h) grid."""
    if not cfg.tc_l_eff_grid or not cfg.tc_r_grid or not cfg.tc_h_grid:
        raise ConfigError("tc_l_eff_grid, tc_r_grid and tc_h_grid must be nonempty")
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = _capacity_model(cfg)
    bandwidth = cfg.bandwidth_hz if cfg.bandwidth_hz > 0 else None

    columns = ["L_eff", "R", "h", "beta_db", "eps", "tau_bps_hz_m2", "tau_bps_khz_m2"]
    if bandwidth:
        columns += ["tau_abs_bps_m2", "throughput_bps"]
    rows = []
    for h in cfg.tc_h_grid:
        for R in cfg.tc_r_grid:
            beta_db = sinr_threshold(h, R, cfg.margin_db, model)
            for l_eff in cfg.tc_l_eff_grid:
                inp = _network_input(cfg, cfg.m_interferers, l_eff, cfg.sigma_s, beta_db)
                res = averaged_outage(inp, n_draws=cfg.shadow_draws, seed=cfg.shadow_seed)
                tc = normalized_tc(cfg.m_interferers, cfg.r_ex, cfg.r_net, R, h,
                                   res.value, l_eff, B=bandwidth)
                row = [l_eff, R, h, beta_db, res.value, tc.tau_normalized, tc.tau_per_khz]
                if bandwidth:
                    row += [tc.tau_absolute, tc.throughput]
                rows.append(tuple(row))

    base = out_dir / f"{cfg.label}_tc_surface"
    csv_path = base.with_suffix(".csv")
    _write_table(csv_path, cfg, {"lambda_density":
                                 interferer_density(cfg.m_interferers, cfg.r_ex, cfg.r_net)},
                 columns, rows)
    written = [csv_path]
    if cfg.plot:
        from .plots import tc_surface_figure

        fig_path = base.with_suffix(".png")
        tc_surface_figure(fig_path, [r[:5] + (r[6],) for r in rows], label=cfg.label)
        written.append(fig_path)
    return written


def cmd_optimize(cfg: ScenarioConfig, threads: int) -> list[Path]:
    """Maximize tau' over (L', R, h); emit a JSON report and a table row."""
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = _capacity_model(cfg)
    bounds = ((cfg.opt_l_lo, cfg.opt_l_hi), (cfg.opt_r_lo, cfg.opt_r_hi),
              (cfg.opt_h_lo, cfg.opt_h_hi))
    network = AveragedOutageInput.homogeneous(
        M=cfg.m_interferers, r_ex=cfg.r_ex, r_net=cfg.r_net,
        source_distance=cfg.source_distance, alpha=cfg.alpha, m0=cfg.m0,
        m_i=cfg.m_i, beta=1.0, gamma_snr=float(db_to_linear(cfg.gamma_db)),
        L_eff=cfg.l_eff, c=cfg.power_ratio, sigma_s=cfg.sigma_s)
    report = optimize(network, model, bounds=bounds,
                      tolerances=(cfg.opt_tol_l, cfg.opt_tol_r, cfg.opt_tol_h),
                      margin_db=cfg.margin_db, shadow_draws=cfg.opt_shadow_draws,
                      shadow_seed=cfg.shadow_seed, max_cycles=cfg.opt_max_cycles,
                      report_margin_db=cfg.report_margin_db,
                      final_draw_multiplier=cfg.opt_final_multiplier)

    base = out_dir / f"{cfg.label}_optimize"
    json_path = base.with_suffix(".json")
    payload = {
        "fhnet": __version__,
        "config": {k: _fmt(v) for k, v in cfg.echo_items()},
        "report": report.to_dict(),
        "trace": report.trace,
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    row_path = out_dir / f"{cfg.label}_optimize_row.txt"
    with open(row_path, "w", encoding="utf-8") as fh:
        fh.write(report.table_row(cfg.label) + "\n")
    written = [json_path, row_path]
    if cfg.plot:
        from .plots import optimize_trace_figure

        fig_path = base.with_suffix(".png")
        optimize_trace_figure(fig_path, report.trace, label=cfg.label)
        written.append(fig_path)
    return written


def cmd_capacity_table(cfg: ScenarioConfig, threads: int) -> list[Path]:
    """Pre-compute the CPFSK symmetric-rate grid and write the table file."""
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = CapacityModel.estimate(h_grid=np.asarray(cfg.capacity_h_grid),
                                   gamma_db_grid=np.asarray(cfg.capacity_gamma_grid),
                                   symbols=cfg.capacity_symbols,
                                   seed=cfg.capacity_seed, threads=threads)
    table_path = out_dir / f"{cfg.label}_capacity.txt"
    model.save(table_path)
    written = [table_path]
    if cfg.plot:
        from .plots import capacity_figure

        fig_path = out_dir / f"{cfg.label}_capacity.png"
        capacity_figure(fig_path, model, label=cfg.label)
        written.append(fig_path)
    return written


_COMMANDS = {
    "outage-curve": cmd_outage_curve,
    "avg-outage": cmd_avg_outage,
    "tc-surface": cmd_tc_surface,
    "optimize": cmd_optimize,
    "capacity-table": cmd_capacity_table,
}


def _add_config_flags(parser: argparse.ArgumentParser):
    base = ScenarioConfig()
    for f in fields(ScenarioConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type is bool:
            parser.add_argument(flag, dest=f.name, default=None,
                                action=argparse.BooleanOptionalAction)
        elif f.type in (int, float, str):
            parser.add_argument(flag, dest=f.name, default=None, type=f.type)
        else:  # list-valued: parsed like a config value
            kind = base.field_type(f.name)
            parser.add_argument(flag, dest=f.name, default=None,
                                type=lambda s, kind=kind: parse_value(s, kind))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fhnet",
        description="Outage and transmission-capacity analysis for finite "
                    "frequency-hopping networks")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        sp = sub.add_parser(name, help=fn.__doc__.splitlines()[0] if fn.__doc__ else None)
        sp.add_argument("--config", default=None, help="scenario file (key = value lines)")
        sp.add_argument("--threads", type=int,
                        default=int(os.environ.get(_ENV_THREADS, "1")),
                        help="worker cap (env FHNET_THREADS)")
        _add_config_flags(sp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {f.name: getattr(args, f.name) for f in fields(ScenarioConfig)}
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be positive")
        cfg = load_config(args.config, **overrides)
        written = _COMMANDS[args.command](cfg, args.threads)
    except ConfigError as exc:
        print(f"fhnet: configuration error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"fhnet: configuration error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"fhnet: configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"fhnet: numerical failure: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
