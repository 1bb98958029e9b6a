"""Figures for CLI runs. Needs the optional ``plot`` extra (matplotlib).

Imported lazily by the CLI only when ``--plot`` is given, so the numerical
modules never depend on matplotlib.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (math.sqrt(5) - 1.0) / 2.0
STYLE = {
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _figure(width=5.0):
    return plt.subplots(figsize=(width, width * GOLDEN))


def plot_rate(fit, path):
    """Supremum error against ``T`` with the calibrated envelope, log-log."""
    with plt.rc_context(STYLE):
        fig, ax = _figure()
        ax.loglog(fit.T, fit.sup_error, "o-", label="sup error")
        if not fit.degenerate:
            ax.loglog(fit.T, fit.predicted_envelope(), "--",
                      label=f"$C\\,T^{{{fit.predicted_slope:.4f}}}$")
            ax.axvspan(*fit.window, color="0.92", zorder=0)
        ax.set_xlabel("$T$")
        ax.set_ylabel(r"$\|(P^T - P) f\|$")
        ax.legend()
        fig.savefig(path)
        plt.close(fig)


def plot_dos(lambdas, series, oracle, path):
    """Series and oracle density of states against ``lambda``."""
    with plt.rc_context(STYLE):
        fig, ax = _figure()
        ax.plot(lambdas, np.real(series), "o", label="series")
        ax.plot(lambdas, np.real(oracle), "x", label="oracle")
        ax.set_xlabel(r"$\lambda$")
        ax.set_ylabel("DoS")
        ax.legend()
        fig.savefig(path)
        plt.close(fig)


def plot_sweep(rows, path):
    """Measured against predicted decay exponents across ``alpha``."""
    alpha = [r.alpha for r in rows]
    with plt.rc_context(STYLE):
        fig, ax = _figure()
        ax.plot(alpha, [-r.measured_slope for r in rows], "o-", label="measured")
        ax.plot(alpha, [r.predicted_rate for r in rows], "s--", label=r"$s/(s+\alpha)$")
        ax.set_xscale("log")
        ax.set_xlabel(r"$\alpha$")
        ax.set_ylabel("decay exponent")
        ax.legend()
        fig.savefig(path)
        plt.close(fig)
