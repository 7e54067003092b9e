"""Matplotlib figure rendering for the experiment report paths.

Every experiment command writes a figure next to its CSV so results can be
eyeballed without post-processing. Uses the Agg backend; nothing here opens
a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "silrtc": dict(color="#1f77b4", marker="o"),
    "silrtc-square": dict(color="#17becf", marker="s"),
    "silrtc-tt": dict(color="#2ca02c", marker="^"),
    "tmac": dict(color="#ff7f0e", marker="o"),
    "tmac-square": dict(color="#d62728", marker="s"),
    "tmac-tt": dict(color="#9467bd", marker="^"),
}


def _series_label(algorithm: str, form) -> str:
    return f"{algorithm} ({form})" if form else algorithm


def plot_rse_curves(rows, path, title: str | None = None) -> None:
    """RSE against missing ratio, one line per (algorithm, form) series.

    ``rows`` are result dicts with at least mr, algorithm, rse; replicate
    rows at the same mr are averaged.
    """
    series = {}
    for row in rows:
        rse = row.get("rse")
        if rse is None or not np.isfinite(rse):
            continue
        key = (row["algorithm"], row.get("form"))
        series.setdefault(key, {}).setdefault(float(row["mr"]), []).append(float(rse))
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for (algorithm, form), points in sorted(series.items(), key=str):
        mrs = sorted(points)
        means = [float(np.mean(points[m])) for m in mrs]
        style = dict(_STYLE.get(algorithm, {}))
        if form == "ka":
            style["linestyle"] = "--"
        ax.semilogy(mrs, means, label=_series_label(algorithm, form), **style)
    ax.set_xlabel("missing ratio")
    ax.set_ylabel("RSE")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    if series:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_phase_diagram(diagram, path, title: str | None = None) -> None:
    """Grayscale success map matching the PGM convention: white cells are
    recovered, darker cells failed harder."""
    with np.errstate(invalid="ignore"):
        shade = 1.0 - np.clip(diagram.grid, 0.0, 1.0)
    shade = np.nan_to_num(shade, nan=0.0)
    shade[diagram.successes()] = 1.0
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    im = ax.imshow(
        shade,
        cmap="gray",
        vmin=0.0,
        vmax=1.0,
        origin="upper",
        aspect="auto",
        interpolation="nearest",
    )
    ax.set_xticks(range(len(diagram.mr_axis)))
    ax.set_xticklabels([f"{m:g}" for m in diagram.mr_axis], fontsize=7)
    ax.set_yticks(range(len(diagram.rank_axis)))
    ax.set_yticklabels([str(r) for r in diagram.rank_axis], fontsize=7)
    ax.set_xlabel("missing ratio")
    ax.set_ylabel("rank")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, label="1 - RSE (white = success)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_image_report(rows, path, title: str | None = None) -> None:
    """Bar chart of final RSE per algorithm/form for a single-mask image
    run; falls back to curves when several missing ratios are present."""
    mrs = {row["mr"] for row in rows if row.get("rse") is not None}
    if len(mrs) > 1:
        plot_rse_curves(rows, path, title=title)
        return
    labels, values, colors = [], [], []
    for row in rows:
        if row.get("rse") is None:
            continue
        labels.append(_series_label(row["algorithm"], row.get("form")))
        values.append(float(row["rse"]))
        colors.append(_STYLE.get(row["algorithm"], {}).get("color", "#555555"))
    fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(labels)), 4.0))
    ax.bar(range(len(values)), values, color=colors)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("RSE")
    if title:
        ax.set_title(title)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
