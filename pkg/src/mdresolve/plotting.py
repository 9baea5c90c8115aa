"""Bar chart of the blocking-mode comparison."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

METRICS = ("reduction_ratio", "precision", "recall")


def compare_chart(reports: Sequence, path: str):
    """One panel per relation, grouped bars per metric, one bar per mode."""
    relations = sorted({r.relation for r in reports})
    modes = list(dict.fromkeys(r.mode for r in reports))
    fig, axes = plt.subplots(1, max(1, len(relations)), figsize=(4.5 * max(1, len(relations)), 3.6), squeeze=False)
    width = 0.8 / max(1, len(modes))
    x = np.arange(len(METRICS))
    for ax, rel in zip(axes[0], relations or [""]):
        by_mode = {r.mode: r for r in reports if r.relation == rel}
        for i, mode in enumerate(modes):
            r = by_mode.get(mode)
            vals = [getattr(r, m) if r else 0.0 for m in METRICS]
            ax.bar(x + (i - (len(modes) - 1) / 2) * width, vals, width, label=mode)
        ax.set_xticks(x)
        ax.set_xticklabels(["reduction ratio", "precision", "recall"])
        ax.set_ylim(0, 1.05)
        ax.set_title(rel)
    axes[0][0].legend(loc="lower left", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
