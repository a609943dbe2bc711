"""Figures for benchmark reports. Uses the non-interactive Agg backend."""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_bench(rows: Sequence[Mapping], path: str) -> str:
    """Query counts and time split per experiment, side by side."""
    labels = [str(r["experiment"]) for r in rows]
    x = np.arange(len(labels))
    fig, (ax_q, ax_t) = plt.subplots(1, 2, figsize=(max(8, 0.9 * len(labels) + 4), 4.2))

    width = 0.27
    for offset, key, color in ((-width, "mq", "#4c72b0"), (0.0, "smq", "#dd8452"), (width, "scq", "#55a868")):
        values = np.array([max(int(r[key]), 0) for r in rows], dtype=float)
        ax_q.bar(x + offset, np.where(values > 0, values, np.nan), width, label=key.upper(), color=color)
    ax_q.set_yscale("log")
    ax_q.set_xticks(x)
    ax_q.set_xticklabels(labels, rotation=45, ha="right")
    ax_q.set_ylabel("queries")
    ax_q.set_title("Queries per experiment")
    ax_q.legend(frameon=False)

    learner = np.array([float(r["s4_seconds"]) for r in rows])
    oracle = np.array([float(r["oracle_seconds"]) for r in rows])
    ax_t.bar(x, learner, 0.6, label="learner", color="#8172b3")
    ax_t.bar(x, oracle, 0.6, bottom=learner, label="oracle", color="#937860")
    ax_t.set_xticks(x)
    ax_t.set_xticklabels(labels, rotation=45, ha="right")
    ax_t.set_ylabel("seconds")
    ax_t.set_title("Time split")
    ax_t.legend(frameon=False)

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
