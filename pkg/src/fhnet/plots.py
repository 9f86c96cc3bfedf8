"""Figure rendering for the CLI report paths.

Each command writes its delimited data first; these helpers render the
matching matplotlib figure next to it.  The Agg backend keeps everything
file-based.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "outage_curve_figure",
    "avg_outage_figure",
    "tc_surface_figure",
    "optimize_trace_figure",
    "capacity_figure",
]


def _new_axes(xlabel, ylabel, title=""):
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def outage_curve_figure(path, gamma_db, eps_closed, eps_mc, stderr, label=""):
    fig, ax = _new_axes("SNR (dB)", "outage probability", label)
    ax.semilogy(gamma_db, eps_closed, "-", color="tab:blue", label="closed form")
    ax.errorbar(gamma_db, eps_mc, yerr=3.0 * np.asarray(stderr), fmt="o", ms=4,
                color="tab:red", label="Monte Carlo (3 s.e.)")
    ax.legend()
    _finish(fig, path)


def avg_outage_figure(path, rows, label=""):
    """rows: (M, L_eff, sigma_s, eps, stderr) tuples."""
    fig, ax = _new_axes("number of interferers M", "average outage probability", label)
    rows = sorted(rows, key=lambda r: (r[1], r[2], r[0]))
    combos = sorted({(r[1], r[2]) for r in rows})
    cmap = plt.get_cmap("tab10")
    styles = {lv: style for lv, style in zip(sorted({c[0] for c in combos}), ("-", "--", ":", "-."))}
    for k, (l_eff, sig) in enumerate(combos):
        ms = [r[0] for r in rows if (r[1], r[2]) == (l_eff, sig)]
        es = [r[3] for r in rows if (r[1], r[2]) == (l_eff, sig)]
        ax.semilogy(ms, es, styles.get(l_eff, "-"), color=cmap(k % 10),
                    label=f"L'={l_eff:g}, sigma_s={sig:g} dB")
    ax.legend(fontsize=8)
    _finish(fig, path)


def tc_surface_figure(path, rows, label=""):
    """rows: (L_eff, R, h, beta_db, eps, tau_pkhz) tuples."""
    ls = sorted({r[0] for r in rows})
    rs = sorted({r[1] for r in rows})
    hs = sorted({r[2] for r in rows})
    varying = [(n, vals) for n, vals in (("L'", ls), ("R", rs), ("h", hs)) if len(vals) > 1]
    if len(varying) == 2 and len(rows) == len(varying[0][1]) * len(varying[1][1]) * 1:
        (xname, xs), (yname, ys) = varying
        idx = {"L'": 0, "R": 1, "h": 2}
        grid = np.full((len(ys), len(xs)), np.nan)
        for r in rows:
            grid[ys.index(r[idx[yname]]), xs.index(r[idx[xname]])] = r[5]
        fig, ax = _new_axes(xname, yname, label)
        pc = ax.pcolormesh(xs, ys, grid, shading="nearest")
        fig.colorbar(pc, ax=ax, label="tau' (bps/kHz-m^2)")
        _finish(fig, path)
        return
    # fall back to tau' against the (first) varying axis, one line per (other two)
    fig, ax = _new_axes(varying[0][0] if varying else "L'", "tau' (bps/kHz-m^2)", label)
    axis = {"L'": 0, "R": 1, "h": 2}[varying[0][0]] if varying else 0
    others = [i for i in range(3) if i != axis]
    for combo in sorted({(r[others[0]], r[others[1]]) for r in rows}):
        pts = sorted((r[axis], r[5]) for r in rows
                     if (r[others[0]], r[others[1]]) == combo)
        names = [("L'", "R", "h")[i] for i in others]
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-",
                label=f"{names[0]}={combo[0]:g}, {names[1]}={combo[1]:g}")
    ax.legend(fontsize=8)
    _finish(fig, path)


def optimize_trace_figure(path, trace, label=""):
    fig, ax = _new_axes("probe step", "tau' (bps/kHz-m^2)", label)
    inc = [1000.0 * t["incumbent"] for t in trace]
    ax.plot(range(1, len(inc) + 1), inc, "-", color="tab:green")
    _finish(fig, path)


def capacity_figure(path, model, label=""):
    fig, ax = _new_axes("SNR per symbol (dB)", "symmetric information rate (bits/symbol)", label)
    for i, h in enumerate(model.h_grid):
        if i % 2 == 0 or i == model.h_grid.size - 1:
            ax.plot(model.gamma_db_grid, model.rate[i], label=f"h={h:g}")
    ax.legend(fontsize=8)
    _finish(fig, path)
