"""Report figures, rendered headless to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .corpus import CorpusStats


def save_length_histogram(stats: CorpusStats, path: str, title: str = "document lengths") -> str:
    """Bar chart of the length distribution with mean and window markers."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    edges = stats.bin_edges()
    ax.bar(edges, stats.bin_counts, width=stats.bin_width, align="edge",
           color="#4878cf", edgecolor="white", linewidth=0.5)
    mean, sd = stats.mean_len, stats.std_len
    ax.axvline(mean, color="#d65f5f", linestyle="-", linewidth=1.2, label=f"mean {mean:.0f}")
    ax.axvline(mean + 2 * sd, color="#d65f5f", linestyle="--", linewidth=1.0,
               label=f"mean+2sd {mean + 2 * sd:.0f}")
    ax.axvline(max(0.0, mean - 3 * sd), color="#6acc65", linestyle="--", linewidth=1.0,
               label=f"mean-3sd {mean - 3 * sd:.0f}")
    ax.set_xlabel("characters per document")
    ax.set_ylabel("documents")
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_loss_curve(losses: list[float], path: str, label: str = "training loss") -> str:
    """Per-step loss trace with a light smoothed overlay."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    steps = range(1, len(losses) + 1)
    ax.plot(steps, losses, color="#b0c4e4", linewidth=0.8, label="per step")
    window = max(1, len(losses) // 50)
    if window > 1:
        smooth = [sum(losses[max(0, i - window):i]) / len(losses[max(0, i - window):i])
                  for i in range(1, len(losses) + 1)]
        ax.plot(steps, smooth, color="#4878cf", linewidth=1.6, label=f"mean over {window}")
    ax.set_xlabel("step")
    ax.set_ylabel("cross-entropy")
    ax.set_title(label)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_bleu_bars(labeled_scores: list[tuple[str, float]], path: str,
                   title: str = "BLEU-4 by model") -> str:
    """Horizontal bars comparing corpus BLEU across models."""
    fig, ax = plt.subplots(figsize=(7, 1.2 + 0.7 * len(labeled_scores)))
    labels = [l for l, _ in labeled_scores]
    scores = [s for _, s in labeled_scores]
    ypos = range(len(labels))
    ax.barh(ypos, scores, color="#4878cf", height=0.55)
    for y, s in zip(ypos, scores):
        ax.text(s + 0.01, y, f"{s:.4f}", va="center", fontsize=9)
    ax.set_yticks(list(ypos), labels)
    ax.invert_yaxis()
    ax.set_xlim(0, 1.05)
    ax.set_xlabel("corpus BLEU-4")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
