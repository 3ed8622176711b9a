"""Figure rendering for the command-line report path.

Every subcommand that writes a delimited dataset also renders a matplotlib
figure of the same data next to it.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .spectra import Histogram  # noqa: E402


def save_histogram_figure(path: str | Path, hist: Histogram,
                          references: dict | None = None,
                          xlabel: str = "x", title: str = "",
                          logy: bool = False) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.stairs(hist.densities, hist.bin_edges, fill=True, alpha=0.4,
              label=f"data (n={hist.count})")
    for label, (x, y) in (references or {}).items():
        ax.plot(x, y, lw=1.5, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("density")
    if logy:
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_series_figure(path: str | Path, series: dict,
                       xlabel: str = "x", ylabel: str = "y",
                       logx: bool = False, logy: bool = False,
                       title: str = "") -> Path:
    """series: label -> (x, y) or (x, y, yerr)."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, data in series.items():
        if len(data) == 3:
            ax.errorbar(data[0], data[1], yerr=data[2], label=label,
                        marker="o", ms=3, lw=1, capsize=2)
        else:
            ax.plot(data[0], data[1], label=label, marker="", lw=1.3)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
