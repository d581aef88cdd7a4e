"""Figure rendering for slices and error studies.

All figures go straight to files; the Agg backend is forced so this works
headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .convergence import ErrorReport
from .interpolation import SliceResult


def plot_slice(slc: SliceResult, path: str | Path, title: str | None = None) -> Path:
    """Heatmap of a 2-D slice with markers on computed and copied nodes.

    Missing nodes (NaN) are left blank.
    """
    if len(slc.axes) != 2:
        raise ValueError(f"plot_slice needs a 2-D slice, got axes {slc.axes!r}")
    xs = np.asarray(slc.axis_values[0], dtype=float)
    ys = np.asarray(slc.axis_values[1], dtype=float)
    values = np.asarray(slc.values, dtype=float)
    masked = np.ma.masked_invalid(values)

    fig, ax = plt.subplots(figsize=(7.0, 5.4))
    # values[i, j] belongs to (xs[i], ys[j]); pcolormesh wants the transpose
    mesh = ax.pcolormesh(xs, ys, masked.T, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="feature value")

    flags = np.asarray(slc.flags)
    for flag, marker, color in (("computed", "o", "black"), ("copied", ".", "white")):
        ii, jj = np.nonzero(flags == flag)
        if ii.size:
            ax.plot(xs[ii], ys[jj], marker, color=color, markersize=3 if marker == "o" else 2,
                    linestyle="none", label=flag)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="upper right", framealpha=0.9)

    ax.set_xlabel(slc.axes[0])
    ax.set_ylabel(slc.axes[1])
    if title is None:
        fixed = ", ".join(f"{k}={v:g}" for k, v in slc.fixed.items())
        title = f"{slc.axes[0]} x {slc.axes[1]}" + (f" at {fixed}" if fixed else "")
    ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_error_study(report: ErrorReport, path: str | Path, title: str | None = None) -> Path:
    """Log-log plot of the L1 interpolation error against the sample count."""
    ns = np.array([lvl.n_mean for lvl in report.levels], dtype=float)
    errs = np.array([lvl.l1_mean for lvl in report.levels], dtype=float)
    stds = np.array([lvl.l1_std for lvl in report.levels], dtype=float)

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.errorbar(ns, errs, yerr=stds, fmt="o", capsize=3, label="measured L1 error")
    if report.slope is not None and np.all(errs > 0.0):
        # fit line through the first point with the regressed slope
        ref = errs[0] * (ns / ns[0]) ** report.slope
        lo, hi = report.slope_interval
        ax.plot(ns, ref, "--", label=f"slope {report.slope:.3f} [{lo:.3f}, {hi:.3f}]")
    ax.set_xscale("log")
    if np.any(errs > 0.0):
        ax.set_yscale("log")
    ax.set_xlabel("computed samples n")
    ax.set_ylabel("L1 error")
    ax.set_title(title or "interpolation error vs sample count")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
