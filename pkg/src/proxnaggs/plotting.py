"""Matplotlib renderings of the CSV series written by the CLI.

Figures are written next to the CSV files they are drawn from; the CSVs stay
the primary output.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "savefig.dpi": 150,
}


def _band(ax, k, mean, std, label, **kw):
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    line, = ax.plot(k, mean, label=label, **kw)
    # multiplicative band mean / (1 + std/mean) .. mean * (1 + std/mean) for log axes
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = 1.0 + np.where(mean > 0, std / mean, 0.0)
    ax.fill_between(k, mean / factor, mean * factor, color=line.get_color(), alpha=0.2,
                    linewidth=0)


def plot_gap_curves(curves, path, xlabel="iteration", title=None):
    """``curves`` maps a method name to ``(k, mean, std)`` of the optimality gap."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name, (k, mean, std) in curves.items():
            _band(ax, k, mean, std, name)
        ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(r"$F(x_k) - F^\star$")
        if title:
            ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_theory_check(series, path):
    """Two panels: gaps at ``x_k``/``v_k`` and the Lyapunov value against its envelope.

    ``series`` is the dict of columns written to ``series.csv`` by ``certify``.
    """
    k = np.asarray(series["k"], dtype=float)
    with plt.rc_context(STYLE):
        fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4))
        _band(left, k, series["gap_x_mean"], series["gap_x_std"], r"$F(x_k)-F^\star$")
        _band(left, k, series["gap_v_mean"], series["gap_v_std"], r"$F(v_k)-F^\star$",
              linestyle="--")
        left.set_yscale("log")
        left.set_xlabel("iteration")
        left.legend()
        if "lyap_mean" in series:
            _band(right, k, series["lyap_mean"], series["lyap_std"], r"$\mathcal{L}_k$")
            right.plot(k, series["envelope_mean"], "k:", label=r"$\mathcal{L}_0\theta^k$")
        else:
            _band(right, k, series["energy_mean"], series["energy_std"], r"$\mathcal{E}_k$")
        right.set_yscale("log")
        right.set_xlabel("iteration")
        right.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_tradeoff(rows, path):
    """Test accuracy against sparsity, one marker series per method."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for method in sorted({r["method"] for r in rows}):
            pts = sorted((float(r["sparsity_mean"]), float(r["accuracy_mean"]))
                         for r in rows if r["method"] == method)
            ax.plot(*zip(*pts), marker="o", label=method)
        ax.set_xlabel("sparsity (fraction of zero weights)")
        ax.set_ylabel("test accuracy")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
