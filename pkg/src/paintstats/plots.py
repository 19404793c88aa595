"""SVG charts over the analysis reports.

Everything renders through the Agg backend with a pinned hash salt and no
embedded date, so identical inputs produce byte-identical SVG files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .color import COLOR_ORDER

BASELINE_COLOR = "red"

# Display colors for the nine-color bars.
_SWATCH = {
    "red": "#c03028",
    "orange": "#e07828",
    "yellow": "#d8b830",
    "green": "#4e9a40",
    "cyan": "#3fb5b0",
    "blue": "#3860b0",
    "purple": "#7d4bab",
    "black": "#202020",
    "white": "#d0d0c8",
}


def _new_figure(width: float = 8.0, height: float = 4.5):
    plt.rcParams["svg.hashsalt"] = "paintstats"
    return plt.subplots(figsize=(width, height))


def _save(fig, path: Path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_decade_counts(
    counts: Sequence[tuple[int, int]], path: str | Path
) -> Path:
    """Bar chart of painting counts per decade."""
    if not counts:
        raise ValueError("empty series: nothing to plot")
    fig, ax = _new_figure()
    years = [start for start, _ in counts]
    values = [count for _, count in counts]
    ax.bar(years, values, width=8.0, color="#5b7fa6")
    ax.set_xlabel("decade")
    ax.set_ylabel("paintings")
    ax.set_title("Paintings per decade")
    return _save(fig, path)


def plot_emotion_trend(
    decade_points: Sequence[tuple[int, float]],
    era_segments: Sequence[tuple[str, int, int, float]],
    path: str | Path,
) -> Path:
    """Decade-level happiness line above the era-level step profile."""
    if not decade_points:
        raise ValueError("empty series: nothing to plot")
    plt.rcParams["svg.hashsalt"] = "paintstats"
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8.0, 6.5), sharex=True)
    top.plot(
        [y for y, _ in decade_points],
        [h for _, h in decade_points],
        marker="o",
        markersize=2.5,
        color="#5b7fa6",
    )
    top.set_ylabel("mean happiness")
    top.set_title("Happiness by decade")
    for label, start, end, mean in era_segments:
        bottom.hlines(mean, start, end, color="#a65b5b", linewidth=2.5)
        bottom.annotate(
            label,
            ((start + end) / 2, mean),
            textcoords="offset points",
            xytext=(0, 6),
            ha="center",
            fontsize=7,
        )
    bottom.set_xlabel("year")
    bottom.set_ylabel("mean happiness")
    bottom.set_title("Happiness by era")
    return _save(fig, path)


def plot_band_proportions(
    rows: Sequence[tuple[int, float, float, float]], path: str | Path
) -> Path:
    """Stacked low/medium/high shares per populated decade."""
    if not rows:
        raise ValueError("empty series: nothing to plot")
    fig, ax = _new_figure()
    years = [r[0] for r in rows]
    lows = [r[1] for r in rows]
    mediums = [r[2] for r in rows]
    highs = [r[3] for r in rows]
    ax.bar(years, lows, width=8.0, label="low", color="#405577")
    ax.bar(years, mediums, width=8.0, bottom=lows, label="medium", color="#8298bd")
    tops = [l + m for l, m in zip(lows, mediums)]
    ax.bar(years, highs, width=8.0, bottom=tops, label="high", color="#c8d4e8")
    ax.set_xlabel("decade")
    ax.set_ylabel("share of faces")
    ax.set_title("Happiness bands per decade")
    ax.legend(loc="upper left", fontsize=8)
    return _save(fig, path)


def plot_gender_series(
    rows: Sequence[tuple[int, float, float | None]], path: str | Path
) -> Path:
    """Gender preference and happiness gap per decade, zero baseline in red."""
    if not rows:
        raise ValueError("empty series: nothing to plot")
    plt.rcParams["svg.hashsalt"] = "paintstats"
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8.0, 6.5), sharex=True)
    years = [r[0] for r in rows]
    top.plot(years, [r[1] for r in rows], marker="o", markersize=2.5, color="#5b7fa6")
    top.axhline(0.0, color=BASELINE_COLOR, linewidth=1.0)
    top.set_ylabel("gender preference")
    top.set_title("Female minus male face share")
    gap_points = [(year, r[2]) for year, r in zip(years, rows) if r[2] is not None]
    bottom.plot(
        [y for y, _ in gap_points],
        [v for _, v in gap_points],
        marker="o",
        markersize=2.5,
        color="#5b7fa6",
    )
    bottom.axhline(0.0, color=BASELINE_COLOR, linewidth=1.0)
    bottom.set_xlabel("decade")
    bottom.set_ylabel("happiness gap")
    bottom.set_title("Female minus male mean happiness")
    return _save(fig, path)


def plot_color_by_band(
    band_means: Mapping[str, Mapping[str, float]], path: str | Path
) -> Path:
    """Stacked per-band color composition, normalized for display."""
    if not band_means:
        raise ValueError("empty series: nothing to plot")
    fig, ax = _new_figure()
    bands = list(band_means)
    positions = range(len(bands))
    bottoms = [0.0] * len(bands)
    for color in COLOR_ORDER:
        shares = []
        for band in bands:
            means = band_means[band]
            total = sum(means.values())
            shares.append(means[color] / total if total > 0 else 0.0)
        ax.bar(
            positions,
            shares,
            bottom=bottoms,
            label=color,
            color=_SWATCH[color],
            edgecolor="#707070",
            linewidth=0.3,
        )
        bottoms = [b + s for b, s in zip(bottoms, shares)]
    ax.set_xticks(list(positions))
    ax.set_xticklabels(bands)
    ax.set_xlabel("happiness band")
    ax.set_ylabel("normalized color share")
    ax.set_title("Color composition by happiness band")
    ax.legend(loc="center left", bbox_to_anchor=(1.0, 0.5), fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_moran_scatter(
    points: Sequence[tuple[str, float, float]], statistic: float, path: str | Path
) -> Path:
    """Centered value vs spatial lag, quadrant axes through zero."""
    if not points:
        raise ValueError("empty series: nothing to plot")
    fig, ax = _new_figure(6.5, 6.0)
    zs = [p[1] for p in points]
    lags = [p[2] for p in points]
    ax.scatter(zs, lags, s=18, color="#5b7fa6")
    for unit, z, lag in points:
        ax.annotate(
            unit, (z, lag), textcoords="offset points", xytext=(3, 3), fontsize=7
        )
    ax.axhline(0.0, color="#909090", linewidth=0.8)
    ax.axvline(0.0, color="#909090", linewidth=0.8)
    ax.set_xlabel("centered happiness")
    ax.set_ylabel("spatial lag")
    ax.set_title(f"Spatial autocorrelation (I = {statistic:.4f})")
    return _save(fig, path)
