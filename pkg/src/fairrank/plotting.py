"""Matplotlib figures for tradeoff curves, marginal rank heatmaps and exposure histograms.

All functions write straight to a file; the format follows the suffix.
SVG output is made reproducible by fixing the hash salt and dropping the
date stamp.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "svg.hashsalt": "fairrank",
    "svg.fonttype": "none",
}


def _save(fig, path) -> Path:
    path = Path(path)
    metadata = {"Date": None} if path.suffix.lower() == ".svg" else None
    fig.savefig(path, bbox_inches="tight", metadata=metadata)
    plt.close(fig)
    return path


def tradeoff_figure(table, path, utility: bool = False) -> Path:
    """NDCG (or raw utility) of the LP and mixing policies against phi."""
    lp = table.lp_utility if utility else table.lp_ndcg
    mix = table.mixing_utility if utility else table.mixing_ndcg
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(table.phi, lp, "o-", label="LP", color="C0")
        ax.plot(table.phi, mix, "s--", label="OPT/TS mixing", color="C1")
        ax.set_xlabel(r"fairness level $\phi$")
        ax.set_ylabel("expected utility" if utility else "NDCG")
        title = table.metadata.get("genre")
        if title:
            ax.set_title(str(title))
        ax.legend()
        return _save(fig, path)


def marginal_heatmaps(matrices: dict, path, cmap: str = "viridis") -> Path:
    """One heatmap per labelled marginal rank matrix (agents x positions)."""
    labels = list(matrices)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(labels), figsize=(3.2 * len(labels), 3.2), squeeze=False)
        for ax, label in zip(axes[0], labels):
            im = ax.imshow(np.asarray(matrices[label]), vmin=0, vmax=1, cmap=cmap, aspect="equal")
            ax.set_title(label)
            ax.set_xlabel("position")
            ax.set_ylabel("agent")
        fig.colorbar(im, ax=axes[0].tolist(), shrink=0.8, label="probability")
        return _save(fig, path)


def exposure_histogram(result, path, bins: int = 10) -> Path:
    """Side-by-side histograms of per-item top-T exposure for both arms."""
    h_opt, h_ts, edges = result.histograms(bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    width = 0.4 * (edges[1] - edges[0])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.bar(centers - width / 2, h_opt, width, label=f"OPT (Gini {result.opt_gini:.3f})")
        ax.bar(centers + width / 2, h_ts, width, label=f"TS (Gini {result.ts_gini:.3f})")
        ax.set_xlabel(f"times shown in top {result.top_t}")
        ax.set_ylabel("items")
        ax.legend()
        return _save(fig, path)
