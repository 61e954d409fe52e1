"""Render the report datasets to PNG files next to their CSVs.

Uses the Agg backend so rendering works headless; the CSV stays the
authoritative artifact and the PNG is a convenience view of the same rows.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def read_delimited(path):
    """Read a '#'-commented CSV back into (columns, rows of floats)."""
    columns = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("# ")
                if body.startswith("columns:"):
                    columns = tuple(c.strip() for c in body[len("columns:"):].split(","))
                continue
            rows.append(tuple(float(v) for v in line.split(",")))
    if columns is None:
        raise ValueError(f"{path}: no '# columns:' header line")
    return columns, rows


def _plot_curves(ax, columns, rows):
    # All curve datasets share the layout (key..., x, b_max); one line per key.
    n_key = len(columns) - 2
    curves = {}
    for row in rows:
        curves.setdefault(row[:n_key], []).append(row[n_key:])
    for key, pts in curves.items():
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        label = ", ".join(f"{c}={v:g}" for c, v in zip(columns[:n_key], key))
        ax.plot(xs, ys, label=label)
    ax.axhline(2.0, color="0.4", linestyle="--", linewidth=0.8)
    ax.set_xlabel(columns[-2])
    ax.set_ylabel(columns[-1])
    ax.legend(fontsize=8)


def _plot_surface(ax, fig, columns, rows):
    xs = sorted({row[0] for row in rows})
    ys = sorted({row[1] for row in rows})
    grid = np.full((len(ys), len(xs)), np.nan)
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: i for i, v in enumerate(ys)}
    for x, y, b in rows:
        grid[yi[y], xi[x]] = b
    mesh = ax.pcolormesh(xs, ys, grid, shading="nearest")
    ax.contour(xs, ys, grid, levels=[2.0], colors="white", linewidths=1.0)
    fig.colorbar(mesh, ax=ax, label=columns[-1])
    ax.set_xlabel(columns[0])
    ax.set_ylabel(columns[1])


def render_figure(csv_path, png_path=None) -> Path:
    """Plot one dataset written by run_figure; returns the PNG path."""
    csv_path = Path(csv_path)
    png_path = Path(png_path) if png_path else csv_path.with_suffix(".png")
    columns, rows = read_delimited(csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=150)
    if columns[-1] != "b_max":
        raise ValueError(f"{csv_path}: expected a b_max dataset, got columns {columns}")
    if len(columns) == 3 and columns[0] == "gamma_t" and columns[1] == "d":
        _plot_surface(ax, fig, columns, rows)
    else:
        _plot_curves(ax, columns, rows)
    ax.set_title(csv_path.stem)
    fig.tight_layout()
    fig.savefig(png_path)
    plt.close(fig)
    return png_path
