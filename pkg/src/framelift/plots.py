"""Matplotlib rendering of bench reports to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import LinearityReport, StabilityReport


def save_stability_figure(report: StabilityReport, path: str) -> None:
    """Max (and mean) recovery ratio against n, log scale, saved to path."""
    ns = [row.n for row in report.rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.semilogy(ns, [row.max_ratio for row in report.rows], "o-", label="max ratio")
    ax.semilogy(ns, [row.mean_ratio for row in report.rows], "s--", label="mean ratio")
    ax.set_xlabel("n")
    ax.set_ylabel(r"$\|Y - xx^*\|_2 / \epsilon$")
    ax.set_title("Noisy recovery error per unit noise")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_linearity_figure(report: LinearityReport, path: str) -> None:
    """Per-n curves of max ratio against epsilon, log-log, saved to path."""
    by_n: dict[int, list[tuple[float, float]]] = {}
    for row in report.rows:
        by_n.setdefault(row.n, []).append((row.epsilon, row.max_ratio))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for n, pts in sorted(by_n.items()):
        pts.sort()
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"n={n}")
    ax.set_xlabel(r"$\epsilon$")
    ax.set_ylabel(r"max $\|Y - xx^*\|_2 / \epsilon$")
    ax.set_title("Error-ratio flatness across noise scales")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
