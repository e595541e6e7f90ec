"""Report writers: delimited metric tables plus rendered figures."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

import numpy as np  # noqa: E402

from .metrics import MetricReport  # noqa: E402


def write_metrics_csv(path, reports: list[MetricReport],
                      config: dict | None = None) -> None:
    """One row per report; the run configuration rides along as a JSON
    comment so every number stays regenerable from the file alone."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        if config is not None:
            f.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        writer = csv.DictWriter(f, fieldnames=["task", "variant", "n", "mean",
                                               "std", "values"])
        writer.writeheader()
        for r in reports:
            writer.writerow(r.row())


def save_loss_curves(path, curves: dict, ylabel: str = "loss") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in curves.items():
        ax.plot(np.arange(1, len(values) + 1), values, label=label)
    ax.set_xlabel("epoch")
    ax.set_ylabel(ylabel)
    ax.set_yscale("log")
    if curves:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _panel(ax, field: np.ndarray, title: str):
    field = np.asarray(field)
    if field.ndim == 2:                       # (nt, nx) space-time map
        im = ax.imshow(field.T, aspect="auto", origin="lower", cmap="RdBu_r")
    else:                                     # (nt, nx, ny) -> final snapshot
        im = ax.imshow(field[-1].T, origin="lower", cmap="RdBu_r")
    ax.set_title(title, fontsize=9)
    return im


def save_field_comparison(path, fields: dict) -> None:
    """Side-by-side panels, e.g. truth / reconstruction / error."""
    n = len(fields)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.2), squeeze=False)
    for ax, (title, field) in zip(axes[0], fields.items()):
        im = _panel(ax, field, title)
        fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_bar_chart(path, reports: list[MetricReport], title: str = "") -> None:
    """Mean with one-standard-deviation error bars, grouped by variant."""
    labels = [f"{r.task}\n{r.variant}" for r in reports]
    means = [r.mean for r in reports]
    stds = [r.std for r in reports]
    fig, ax = plt.subplots(figsize=(1.4 * max(4, len(reports)), 4))
    ax.bar(np.arange(len(reports)), means, yerr=stds, capsize=4,
           color="steelblue")
    ax.set_xticks(np.arange(len(reports)))
    ax.set_xticklabels(labels, fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
