"""Figure rendering for campaign results."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .engine import CampaignResult  # noqa: E402

_COLORS = {"5G": "#c0392b", "4G": "#2e86c1", "3.9G": "#7f8c8d"}


def plot_figure1(result: CampaignResult, path: str | Path, dpi: int = 150) -> Path:
    """Side-by-side downlink/uplink bars of mean surface SAR with 95% CI whiskers."""
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.4))
    for ax, direction in zip(axes, ("downlink", "uplink")):
        techs = list(result.technologies)
        means = [result.stats[t][direction].mean_sar_w_kg for t in techs]
        err = [result.stats[t][direction].sar_ci_half_width for t in techs]
        colors = [_COLORS.get(t, "#555555") for t in techs]
        ax.bar(techs, means, yerr=err, color=colors, capsize=4, edgecolor="black", linewidth=0.6)
        ax.set_yscale("log")
        ax.set_title(direction.capitalize())
        ax.set_ylabel("Mean surface SAR (W/kg)")
        ax.grid(axis="y", which="both", alpha=0.3)
    fig.suptitle(f"SAR by technology ({result.trials} trials, seed {result.master_seed})", fontsize=10)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
