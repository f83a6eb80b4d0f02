"""Report figures rendered to files next to the delimited outputs.

All figures use the Agg backend so the report path works headless; callers
pass explicit output paths and get the written path back.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def training_curves(metrics, dest: str | Path) -> Path:
    """Loss and accuracy per epoch, two stacked panels."""
    epochs = [r.epoch for r in metrics.epochs]
    fig, (ax_loss, ax_acc) = plt.subplots(2, 1, figsize=(6.4, 6.0), sharex=True)
    ax_loss.plot(epochs, [r.mean_train_loss for r in metrics.epochs], "o-", ms=3)
    ax_loss.set_ylabel("mean train loss")
    ax_loss.grid(alpha=0.3)
    ax_acc.plot(
        epochs, [r.train_accuracy for r in metrics.epochs], "o-", ms=3, label="train"
    )
    ax_acc.plot(
        epochs, [r.val_accuracy for r in metrics.epochs], "s-", ms=3, label="val"
    )
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("accuracy")
    ax_acc.set_ylim(0.0, 1.02)
    ax_acc.grid(alpha=0.3)
    ax_acc.legend(loc="lower right")
    fig.tight_layout()
    dest = Path(dest)
    fig.savefig(dest, dpi=150)
    plt.close(fig)
    return dest


def confusion_matrix_figure(confusion, class_names, dest: str | Path) -> Path:
    """Counts heatmap, rows true class, columns predicted."""
    confusion = np.asarray(confusion)
    n = confusion.shape[0]
    fig, ax = plt.subplots(figsize=(6.4, 5.6))
    im = ax.imshow(confusion, cmap="Blues")
    ax.set_xticks(range(n), class_names[:n], rotation=45, ha="right")
    ax.set_yticks(range(n), class_names[:n])
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = confusion.max() / 2 if confusion.max() else 0.5
    for i in range(n):
        for j in range(n):
            ax.text(
                j,
                i,
                str(confusion[i, j]),
                ha="center",
                va="center",
                fontsize=8,
                color="white" if confusion[i, j] > threshold else "black",
            )
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    dest = Path(dest)
    fig.savefig(dest, dpi=150)
    plt.close(fig)
    return dest


def latency_figure(latencies_us, report: dict, dest: str | Path) -> Path:
    """Per-frame latency histogram with p50/p99 markers."""
    lat_ms = np.asarray(latencies_us, dtype=np.float64) / 1000.0
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.hist(lat_ms, bins=60, color="#4878a8", edgecolor="none")
    for key, style in (("p50_us", "--"), ("p99_us", ":")):
        ax.axvline(
            report[key] / 1000.0,
            color="crimson",
            linestyle=style,
            label=f"{key[:-3]} = {report[key] / 1000.0:.2f} ms",
        )
    ax.set_xlabel("per-frame latency (ms)")
    ax.set_ylabel("frames")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    dest = Path(dest)
    fig.savefig(dest, dpi=150)
    plt.close(fig)
    return dest
