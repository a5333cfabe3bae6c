"""Figure rendering for scenario outputs.

Each run writes ready-to-plot CSVs; these helpers render the standard
view of each scenario to PNG next to the data so a run is inspectable
without further tooling.  Everything draws on the Agg backend.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def _save(fig, path: Path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def render_correlation_figure(
    path: Path,
    series_list,
    labels,
    fits=None,
    window_ns=None,
    title="equal-site autocorrelation",
) -> Path:
    """Log-log C_11(t) curves with optional fit lines and window shading."""
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    for i, (series, label) in enumerate(zip(series_list, labels)):
        color = f"C{i % 10}"
        t = series.times_ns
        pos = (t > 0) & (series.c11 > 0)
        ax.plot(t[pos], series.c11[pos], "o-", ms=3, lw=1, color=color, label=label)
        if series.stderr is not None:
            lo = series.c11 - series.stderr
            hi = series.c11 + series.stderr
            band = pos & (lo > 0)
            ax.fill_between(t[band], lo[band], hi[band], alpha=0.2, color=color, lw=0)
    if fits is not None:
        for i, fit in enumerate(fits):
            if fit is None:
                continue
            lo, hi = fit.window_ns
            tt = np.geomspace(lo, hi, 50)
            series = series_list[i]
            sel = (series.times_ns >= lo) & (series.times_ns <= hi) & (series.c11 > 0)
            if not np.any(sel):
                continue
            t_ref = series.times_ns[sel][0]
            c_ref = series.c11[sel][0]
            ax.plot(
                tt,
                c_ref * (tt / t_ref) ** (-fit.alpha),
                "--",
                color=f"C{i % 10}",
                lw=1,
                alpha=0.8,
            )
    if window_ns is not None:
        ax.axvspan(window_ns[0], window_ns[1], color="0.9", zorder=0)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t (ns)")
    ax.set_ylabel(r"$C_{1,1}$")
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)


def render_alpha_sweep_figure(path: Path, x, alpha, alpha_err, xlabel, title) -> Path:
    """Transport exponent against the sweep axis."""
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    ax.errorbar(x, alpha, yerr=alpha_err, fmt="o-", capsize=3)
    ax.axhline(0.5, ls="--", color="0.6", lw=1, label=r"diffusive $\alpha=1/2$")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(r"transport exponent $\alpha$")
    ax.set_ylim(bottom=min(0.0, float(np.min(alpha)) - 0.05))
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)


def render_entropy_figure(path: Path, tr_ns, s_pe_by_seed, s_target, title) -> Path:
    """Participation entropy growth toward the Haar value."""
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    for seed, series in s_pe_by_seed.items():
        ax.plot(tr_ns, series, "o-", ms=3, lw=1, label=f"seed {seed}")
    ax.axhline(s_target, ls=":", color="k", lw=1, label="Haar target")
    ax.set_xlabel(r"$t_R$ (ns)")
    ax.set_ylabel(r"$S_{PE}$ (nats)")
    ax.set_title(title)
    ax.legend(fontsize=7)
    return _save(fig, path)


def render_histogram_figure(path: Path, centers, density, ideal, title) -> Path:
    """Rescaled probability-weight histogram against the exponential law."""
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    ax.semilogy(centers, density, "o", ms=4, label="measured")
    ax.semilogy(centers, ideal, "-", lw=1.2, label=r"$e^{-Dp}$")
    ax.set_xlabel(r"$D\,p$")
    ax.set_ylabel("density")
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)


def render_timeseries_figure(path: Path, t_ns, curves, ylabel, title, errorbars=None) -> Path:
    """Labelled observable curves on a linear time axis."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for label, values in curves.items():
        err = errorbars.get(label) if errorbars else None
        if err is not None:
            ax.errorbar(t_ns, values, yerr=err, fmt="o-", ms=3, lw=1, label=label)
        else:
            ax.plot(t_ns, values, "o-", ms=3, lw=1, label=label)
    ax.set_xlabel("t (ns)")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)


def render_rabi_fit_figure(path: Path, t_ns, p1, fit_curve, title) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(t_ns, p1, ".", ms=3, label="scan")
    ax.plot(t_ns, fit_curve, "-", lw=1.2, label="fit")
    ax.set_xlabel("t (ns)")
    ax.set_ylabel(r"$P_1$")
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)


def render_crosstalk_scan_figure(path: Path, phi, omega_r, model, title) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(phi, omega_r, ".", ms=4, label="scan")
    ax.plot(phi, model, "-", lw=1.2, label="fit")
    ax.set_xlabel(r"$\varphi_{ii}$ (rad)")
    ax.set_ylabel(r"$\Omega_R$ (MHz)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)
