"""Rendering of parsed recipes with matplotlib (Agg backend; batch only)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import Dataset, check_normalization, load_dataset
from .recipe import FigureRecipe, PanelSpec


def _legend_label(series, values) -> str:
    base = series.label or series.column
    total = float(np.sum(values))
    if series.expected_sum is not None and abs(total - series.expected_sum) > 1e-9:
        raise ValueError(
            f"legend sum for {series.column!r} is {total!r}, recipe "
            f"metadata says {series.expected_sum!r}"
        )
    return f"{base} (sum {total:.6g})"


def _draw_line(ax, panel: PanelSpec, ds: Dataset) -> None:
    xs = ds.column(panel.x) if panel.x else np.arange(ds.rows.shape[0])
    for series in panel.series:
        ys = ds.column(series.column)
        label = (_legend_label(series, ys) if panel.legend_sums
                 else (series.label or series.column))
        ax.plot(xs, ys, label=label, **series.style)
    ax.legend(fontsize=8)


def _draw_histogram(ax, panel: PanelSpec, ds: Dataset) -> None:
    values = ds.column("value")
    weights = ds.column("re_weight")
    if values.size == 0:
        raise ValueError(f"{ds.path}: empty distribution")
    span = float(values.max() - values.min())
    width = panel.bin_width or (span / 40.0 if span > 0 else 1.0)
    edges = np.arange(values.min() - width / 2.0,
                      values.max() + width, width)
    binned, _ = np.histogram(values, bins=edges, weights=weights)
    centers = 0.5 * (edges[:-1] + edges[1:])
    total = float(weights.sum())
    colors = np.where(binned < 0, "tab:red", "tab:blue")
    ax.bar(centers, binned, width=0.9 * width, color=colors)
    ax.axhline(0.0, color="black", linewidth=0.8)
    label = f"sum {total:.6g}"
    if ds.has("im_weight"):
        label += f" (+ {float(np.sum(ds.column('im_weight'))):.2g}i)"
    ax.bar([], [], color="tab:blue", label=label)
    ax.legend(fontsize=8)


def _draw_contour(ax, panel: PanelSpec, ds: Dataset) -> None:
    xs = ds.column(panel.x)
    ys = ds.column(panel.y)
    zs = ds.column(panel.z)
    xu, yu = np.unique(xs), np.unique(ys)
    grid = np.full((yu.size, xu.size), np.nan)
    ix = np.searchsorted(xu, xs)
    iy = np.searchsorted(yu, ys)
    grid[iy, ix] = zs
    if np.any(np.isnan(grid)):
        raise ValueError(f"{ds.path}: ({panel.x}, {panel.y}) is not a full grid")
    cf = ax.contourf(xu, yu, grid, levels=21)
    ax.figure.colorbar(cf, ax=ax, label=panel.z)


_DRAWERS = {"line": _draw_line, "histogram": _draw_histogram,
            "contour": _draw_contour}


def render(recipe: FigureRecipe, base_dir: str = ".",
           out_dir: str = None) -> str:
    """Render one recipe; returns the path of the written image."""
    n = len(recipe.panels)
    ncols = recipe.ncols or min(n, 2)
    nrows = -(-n // ncols)
    figsize = recipe.figsize or (5.0 * ncols, 3.6 * nrows)
    fig, axes = plt.subplots(nrows, ncols, figsize=figsize, squeeze=False)
    try:
        for i, panel in enumerate(recipe.panels):
            ax = axes[i // ncols][i % ncols]
            ds = load_dataset(os.path.join(base_dir, panel.input))
            check_normalization(ds)
            _DRAWERS[panel.kind](ax, panel, ds)
            if panel.title:
                ax.set_title(panel.title, fontsize=10)
            if panel.xlabel:
                ax.set_xlabel(panel.xlabel)
            if panel.ylabel:
                ax.set_ylabel(panel.ylabel)
            if panel.xlim:
                ax.set_xlim(*panel.xlim)
            if panel.ylim:
                ax.set_ylim(*panel.ylim)
        for j in range(n, nrows * ncols):
            axes[j // ncols][j % ncols].axis("off")
        if recipe.suptitle:
            fig.suptitle(recipe.suptitle)
        fig.tight_layout()
        out = os.path.join(out_dir or base_dir, recipe.output)
        fig.savefig(out, dpi=150)
    finally:
        plt.close(fig)
    return out
