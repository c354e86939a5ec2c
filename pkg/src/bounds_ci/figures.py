"""Render coverage and expected-length curves to image files.

Thin plotting layer over the simulation output: one figure per metric,
methods overlaid, nominal coverage marked. Uses the Agg backend so it
works headless; the CSV emitted next to the figures remains the primary
artifact.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .simulation import CoveragePoint

__all__ = ["save_coverage_figure", "save_length_figure"]

_METHOD_STYLE = {
    "CI_TI": {"color": "tab:blue", "label": "test inversion"},
    "CI_TI_union": {"color": "tab:red", "label": "test inversion + midpoint"},
    "CI_MA": {"color": "tab:green", "label": "adaptive interval"},
}


def _by_method(points: list[CoveragePoint]) -> dict[str, list[CoveragePoint]]:
    grouped: dict[str, list[CoveragePoint]] = defaultdict(list)
    for p in points:
        grouped[p.method].append(p)
    for pts in grouped.values():
        pts.sort(key=lambda p: p.delta)
    return grouped


def save_coverage_figure(points: list[CoveragePoint], alpha: float, path, title: str | None = None) -> Path:
    """Plot coverage against interval length, with the nominal level marked."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for method, pts in _by_method(points).items():
        style = _METHOD_STYLE.get(method, {"color": "gray", "label": method})
        ax.plot([p.delta for p in pts], [p.coverage for p in pts],
                color=style["color"], label=style["label"])
    ax.axhline(1.0 - alpha, color="black", linewidth=0.8)
    ax.set_xlabel("interval length (standard error units)")
    ax.set_ylabel("coverage")
    ax.set_ylim(0.0, 1.02)
    ax.legend(loc="lower right", fontsize=9)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_length_figure(points: list[CoveragePoint], path, title: str | None = None) -> Path:
    """Plot expected length in excess of the true interval length."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for method, pts in _by_method(points).items():
        style = _METHOD_STYLE.get(method, {"color": "gray", "label": method})
        ax.plot([p.delta for p in pts], [p.expected_excess_length for p in pts],
                color=style["color"], label=style["label"])
    ax.set_xlabel("interval length (standard error units)")
    ax.set_ylabel("expected excess length")
    ax.legend(loc="upper right", fontsize=9)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
