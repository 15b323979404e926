"""Figure renderers: one figure per call, output path as argument.

Stateless by design; nothing here recomputes field math, only draws what
the files contain. Matplotlib runs on the Agg backend so the renderers work
headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fields import Field, load_field

_SERIES_STYLE = [
    {"colors": "black", "linestyles": "solid"},
    {"colors": "tab:blue", "linestyles": "dashed"},
    {"colors": "tab:red", "linestyles": "dotted"},
    {"colors": "tab:green", "linestyles": "dashdot"},
]


def _require_2d(field: Field, what: str):
    if field.dim != 2:
        raise ValueError(f"{what} needs a 2D field, got {field.dim}D")


def plot_contours(paths, out: str, levels: int = 12) -> str:
    """Overlaid iso-level contours of one or more scalar fields."""
    fields = [load_field(p) for p in paths]
    for f in fields:
        _require_2d(f, "contour plot")
    base = fields[0]
    lo = min(float(f.values.min()) for f in fields)
    hi = max(float(f.values.max()) for f in fields)
    level_values = np.linspace(lo, hi, levels + 2)[1:-1]
    fig, ax = plt.subplots(figsize=(6, 6))
    x, y = base.axis(0), base.axis(1)
    handles = []
    for i, (path, f) in enumerate(zip(paths, fields)):
        style = _SERIES_STYLE[i % len(_SERIES_STYLE)]
        cs = ax.contour(x, y, f.values.T, levels=level_values, linewidths=1.0, **style)
        handles.append(
            plt.Line2D(
                [], [], color=style["colors"], linestyle=style["linestyles"],
                label=f.header.get("field", "?") + f" [{i}]",
            )
        )
        del cs
    ax.set_aspect("equal")
    ax.legend(handles=handles, loc="upper right", fontsize=8)
    ax.set_title("iso-level contours")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def plot_quiver(
    grad_x_path: str,
    grad_y_path: str,
    out: str,
    mask_path: str | None = None,
    stride: int = 1,
) -> str:
    """Gradient arrows, restricted to interior nodes when a mask is given.

    An all-exterior mask renders an empty axes without error.
    """
    gx = load_field(grad_x_path)
    gy = load_field(grad_y_path)
    _require_2d(gx, "quiver plot")
    if gx.counts != gy.counts:
        raise ValueError("gradient components live on different grids")
    keep = np.ones(gx.counts, dtype=bool)
    if mask_path is not None:
        mask = load_field(mask_path)
        if mask.counts != gx.counts:
            raise ValueError("mask grid does not match the gradient grid")
        keep = mask.values > 0.5
    xs, ys = np.meshgrid(gx.axis(0), gx.axis(1), indexing="ij")
    sl = (slice(None, None, stride), slice(None, None, stride))
    keep = keep[sl]
    fig, ax = plt.subplots(figsize=(6, 6))
    if keep.any():
        ax.quiver(
            xs[sl][keep], ys[sl][keep],
            gx.values[sl][keep], gy.values[sl][keep],
            angles="xy", width=0.002, scale=40,
        )
    ax.set_aspect("equal")
    ax.set_title(f"gradient field ({int(keep.sum())} arrows)")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def plot_histogram(path: str, out: str, bins: int = 60, drop_flagged: bool = True):
    """Value distribution of a scalar field (winding numbers, magnitudes...).

    Returns (counts, edges) alongside writing the figure, so callers can
    inspect the distribution the figure shows.
    """
    field = load_field(path)
    values = field.values.reshape(-1)
    if drop_flagged:
        values = values[~field.flagged_mask().reshape(-1)]
    counts, edges = np.histogram(values, bins=bins)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(edges[:-1], counts, width=np.diff(edges), align="edge", color="tab:blue")
    ax.set_xlabel(field.header.get("field", "value"))
    ax.set_ylabel("count")
    ax.set_title(f"distribution of {field.header.get('field', 'values')}")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out, counts, edges


def plot_isosurface(path: str, level: float, out: str) -> str:
    """Triangulated level set of a 3D field, rendered to an image."""
    from skimage import measure

    field = load_field(path)
    if field.dim != 3:
        raise ValueError(f"isosurface needs a 3D field, got {field.dim}D")
    verts, faces, _, _ = measure.marching_cubes(field.values, level=level)
    verts = np.asarray(field.origin) + verts * field.spacing
    fig = plt.figure(figsize=(6, 6))
    ax = fig.add_subplot(projection="3d")
    ax.plot_trisurf(
        verts[:, 0], verts[:, 1], faces, verts[:, 2],
        cmap="viridis", lw=0.1, antialiased=True,
    )
    ax.set_title(f"isosurface @ {level:g}")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out
