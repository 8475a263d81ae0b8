"""SVG renderings of sweep slices."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sweep import PlotDataset  # noqa: E402

# fixed ids and no timestamp keep SVG output byte-stable
matplotlib.rcParams["svg.hashsalt"] = "squeezebell"
_SVG_META = {"Date": None, "Creator": None}


def _grid(ds: PlotDataset):
    xs = np.unique([r[0] for r in ds.rows])
    ys = np.unique([r[1] for r in ds.rows])
    z = np.full((len(ys), len(xs)), np.nan)
    for x, y, p in ds.rows:
        z[np.searchsorted(ys, y), np.searchsorted(xs, x)] = p
    return xs, ys, z


def surface_svg(ds: PlotDataset, path: str | Path) -> Path:
    """Colour map of ``P`` over the two slice axes."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    if ds.rows:
        xs, ys, z = _grid(ds)
        mesh = ax.pcolormesh(xs, ys, 100 * z, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="success probability (%)")
    else:
        ax.text(0.5, 0.5, "no data", ha="center", va="center", transform=ax.transAxes)
    ax.set_xlabel(ds.x_label)
    ax.set_ylabel(ds.y_label)
    ax.set_title(ds.title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def line_svg(ds: PlotDataset, path: str | Path) -> Path:
    """One curve of ``P`` against the y axis for each x value (e.g. one per θ1)."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    if ds.rows:
        xs, ys, z = _grid(ds)
        for j, x in enumerate(xs):
            ax.plot(ys, 100 * z[:, j], color=plt.cm.viridis(j / max(len(xs) - 1, 1)), lw=0.8)
        ax.set_ylabel("success probability (%)")
    ax.set_xlabel(ds.y_label)
    ax.set_title(ds.title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path
