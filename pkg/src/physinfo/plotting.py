"""Figures for the segment report, rendered straight to files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .image_io import overlay_pixels  # noqa: E402


def plot_levels(images, labels, path, title: str | None = None) -> None:
    """Two rows: pyramid intensities on top, region overlays below, level 0 first."""
    n = len(images)
    fig, axes = plt.subplots(2, n, figsize=(2.4 * n, 5.0), squeeze=False)
    for lv in range(n):
        axes[0, lv].imshow(images[lv], cmap="gray", vmin=0, vmax=255, interpolation="nearest")
        axes[0, lv].set_title(f"level {lv}", fontsize=9)
        ids = np.unique(labels[lv])
        axes[1, lv].imshow(overlay_pixels(labels[lv]), interpolation="nearest")
        axes[1, lv].set_title(f"{len(ids)} regions", fontsize=9)
    for ax in axes.ravel():
        ax.set_xticks([])
        ax.set_yticks([])
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_region_counts(counts: dict[int, int], path) -> None:
    levels = sorted(counts)
    fig, ax = plt.subplots(figsize=(4.0, 3.0))
    ax.bar(levels, [counts[lv] for lv in levels], color="0.4")
    ax.set_xlabel("level")
    ax.set_ylabel("regions")
    ax.set_xticks(levels)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
