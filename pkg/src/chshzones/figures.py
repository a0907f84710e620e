"""Render scan point files to PNG.

Figures are drawn from the arrays a scan emits (or the CSVs it wrote), so the
delimited output stays the primary artifact and the pictures sit beside it.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

ZONE_COLORS = {1: "#bbbbbb", 2: "#d62728", 3: "#9467bd", 4: "#1f77b4"}


def _axes_lines(ax):
    ax.axvline(2.0, color="k", lw=0.6, ls="--")
    ax.axhline(0.0, color="k", lw=0.6, ls="--")
    ax.set_xlabel("CHSH")
    ax.set_ylabel(r"CHSH$_E$ (bits)")


def zone_scatter(points: np.ndarray, path, title: str = "") -> Path:
    """(chsh, chsh_e, zone) rows coloured by zone."""
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    for z, color in ZONE_COLORS.items():
        sel = points[:, 2] == z
        if sel.any():
            ax.scatter(points[sel, 0], points[sel, 1], s=1, c=color, lw=0,
                       label=f"zone {z}", rasterized=True)
    _axes_lines(ax)
    if title:
        ax.set_title(title)
    ax.legend(markerscale=8, fontsize=8, loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def correlator_cloud(rows: np.ndarray, path, title: str = "") -> Path:
    """3-D cloud of (E00, E01, E10) coloured by E11."""
    fig = plt.figure(figsize=(5.5, 4.8))
    ax = fig.add_subplot(projection="3d")
    sc = ax.scatter(rows[:, 0], rows[:, 1], rows[:, 2], c=rows[:, 3], s=1,
                    cmap="coolwarm", vmin=-1, vmax=1, rasterized=True)
    ax.set_xlabel("E00")
    ax.set_ylabel("E01")
    ax.set_zlabel("E10")
    fig.colorbar(sc, ax=ax, shrink=0.6, label="E11")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


FIGURES = {
    "points": ("fig1_zones.png", zone_scatter, "CHSH vs CHSH_E"),
    "zone3_points": ("fig2_zone3.png", zone_scatter, "zone 3"),
    "correlators_e_violating": ("fig3_correlators_e.png", correlator_cloud, "CHSH_E > 0"),
    "correlators_c_violating": ("fig3_correlators_c.png", correlator_cloud, "CHSH > 2"),
}


def render_all(emitted: dict, out_dir) -> dict:
    """Draw every figure whose point set is present; returns kind -> path."""
    out_dir = Path(out_dir)
    out = {}
    for kind, rows in emitted.items():
        if kind not in FIGURES or len(rows) == 0:
            continue
        name, draw, title = FIGURES[kind]
        out[kind] = draw(np.asarray(rows), out_dir / name, title)
    return out
