"""Inside/outside classification from winding numbers (2D) and flux (3D).

Both quantities are assembled from convolutions of directional kernels with
weighted impulse fields: tangent components at curve vertices in 2D, normal
components at triangle incenters in 3D. Values at nodes that coincide with
a source are meaningless by construction and come back flagged.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .convolution import FftConvolver, KernelField
from .errors import ValidationError
from .grid import Curve2D, GridSpec, ScalarField, Surface3D, snap_points
from .precision import PrecisionConfig, bigfloat_context


WINDING_2D = "winding2d"
DEGREE_3D = "degree3d"


def _combine_context(cfg: PrecisionConfig):
    return bigfloat_context(cfg.bits) if cfg.is_bigfloat else contextlib.nullcontext()


@dataclass(frozen=True)
class TangentData:
    """Snapped curve vertices with edge tangents accumulated per node."""

    vertex_nodes: np.ndarray
    tangents: np.ndarray
    g1: ScalarField
    g2: ScalarField

    @classmethod
    def build(cls, curve: Curve2D, grid: GridSpec) -> "TangentData":
        if grid.dim != 2:
            raise ValidationError("winding numbers need a 2D grid")
        ps = snap_points(curve.vertices, grid)
        snapped = grid.coords_of_flat(ps.snapped_indices)
        tangents = np.roll(snapped, -1, axis=0) - snapped
        g1 = np.zeros(grid.num_nodes)
        g2 = np.zeros(grid.num_nodes)
        np.add.at(g1, ps.snapped_indices, tangents[:, 0])
        np.add.at(g2, ps.snapped_indices, tangents[:, 1])
        return cls(
            vertex_nodes=np.unique(ps.snapped_indices),
            tangents=tangents,
            g1=ScalarField(grid, g1),
            g2=ScalarField(grid, g2),
        )


@dataclass(frozen=True)
class FluxData:
    """Snapped triangle centers with normal components accumulated per node."""

    center_nodes: np.ndarray
    impulses: tuple

    @classmethod
    def build(cls, surface: Surface3D, grid: GridSpec) -> "FluxData":
        if grid.dim != 3:
            raise ValidationError("topological degree needs a 3D grid")
        ps = snap_points(surface.centers, grid)
        # Area-weighted normals make the sum a quadrature of the flux
        # integral, so mu is the topological degree itself (1 inside a
        # simple surface, 0 outside).
        e1 = surface.triangles[:, 1] - surface.triangles[:, 0]
        e2 = surface.triangles[:, 2] - surface.triangles[:, 0]
        areas = 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)
        weighted = surface.normals * areas[:, None]
        fields = []
        for a in range(3):
            g = np.zeros(grid.num_nodes)
            np.add.at(g, ps.snapped_indices, weighted[:, a])
            fields.append(ScalarField(grid, g))
        return cls(
            center_nodes=np.unique(ps.snapped_indices), impulses=tuple(fields)
        )


def _offset_mesh(grid: GridSpec):
    offsets = [
        grid.spacing * np.arange(-(c - 1), c, dtype=np.float64)
        for c in grid.counts
    ]
    return np.meshgrid(*offsets, indexing="ij")


def _ratio_kernel(grid: GridSpec, numerator, power: int) -> KernelField:
    """numerator / |offset|^power with the zero offset set to 0."""
    mesh = _offset_mesh(grid)
    r = np.sqrt(sum(m * m for m in mesh))
    center = tuple(c - 1 for c in grid.counts)
    r[center] = 1.0
    values = numerator(mesh) / r**power
    values[center] = 0.0
    return KernelField(grid.spacing, values)


def winding_field(
    curve: Curve2D, grid: GridSpec, cfg: PrecisionConfig
) -> ScalarField:
    """Winding number at every grid node, counterclockwise positive.

    mu = (1/2pi) [ -(x/r^2 conv g2) + (y/r^2 conv g1) ] with the curve
    vertices snapped to nodes; vertex-node values are flagged.
    """
    data = TangentData.build(curve, grid)
    k_cr = _ratio_kernel(grid, lambda m: m[0], 2)
    k_sr = _ratio_kernel(grid, lambda m: m[1], 2)
    conv = FftConvolver(grid, k_cr.shape, cfg)
    kcr_hat, ksr_hat = conv.forward_pair(
        k_cr.values, k_cr.shape, k_sr.values, k_sr.shape
    )
    g1_hat, g2_hat = conv.forward_pair(
        data.g1.as_grid(), grid.counts, data.g2.as_grid(), grid.counts
    )
    with _combine_context(cfg):
        h = ksr_hat * g1_hat - kcr_hat * g2_hat
    mu = conv.inverse_to_grid(h)
    if mu.dtype == object:
        mu = np.array([float(v) for v in mu.reshape(-1)], dtype=np.float64)
    values = np.asarray(mu, dtype=np.float64).reshape(-1) / (2.0 * math.pi)
    return ScalarField(grid, values, flagged_nodes=data.vertex_nodes)


def degree_field(
    surface: Surface3D, grid: GridSpec, cfg: PrecisionConfig
) -> ScalarField:
    """Normalized flux (topological degree) at every grid node.

    mu = -(1/4pi) sum_a (offset_a/r^3 conv g_a); triangle-center nodes are
    flagged.
    """
    data = FluxData.build(surface, grid)
    kernels = [_ratio_kernel(grid, (lambda a: lambda m: m[a])(a), 3) for a in range(3)]
    conv = FftConvolver(grid, kernels[0].shape, cfg)
    k0_hat, k1_hat = conv.forward_pair(
        kernels[0].values, kernels[0].shape, kernels[1].values, kernels[1].shape
    )
    k2_hat, g0_hat = conv.forward_pair(
        kernels[2].values, kernels[2].shape,
        data.impulses[0].as_grid(), grid.counts,
    )
    g1_hat, g2_hat = conv.forward_pair(
        data.impulses[1].as_grid(), grid.counts,
        data.impulses[2].as_grid(), grid.counts,
    )
    with _combine_context(cfg):
        h = k0_hat * g0_hat + k1_hat * g1_hat + k2_hat * g2_hat
    mu = conv.inverse_to_grid(h)
    if mu.dtype == object:
        mu = np.array([float(v) for v in mu.reshape(-1)], dtype=np.float64)
    values = -np.asarray(mu, dtype=np.float64).reshape(-1) / (4.0 * math.pi)
    return ScalarField(grid, values, flagged_nodes=data.center_nodes)


def classify(
    mu: ScalarField, mode: str, threshold: float | None = None
) -> ScalarField:
    """Interior mask from a winding/degree field.

    Default rule: round(mu) > 0 in 2D, round(mu) >= 1 in 3D. ``threshold``
    replaces rounding with mu >= threshold for noisy curves. Flagged nodes
    inherit the classification of their nearest unflagged node and stay
    flagged (low confidence) on the mask.
    """
    if mode not in (WINDING_2D, DEGREE_3D):
        raise ValidationError(f"unknown classification mode {mode!r}")
    values = mu.values.copy()
    if mu.flagged_nodes is not None and mu.flagged_nodes.size:
        flagged = np.zeros(mu.grid.num_nodes, dtype=bool)
        flagged[mu.flagged_nodes] = True
        if flagged.all():
            raise ValidationError("every node is flagged; cannot classify")
        # Nearest unflagged node fill (grid-index metric).
        _, nearest = ndimage.distance_transform_edt(
            flagged.reshape(mu.grid.shape), return_indices=True
        )
        fill = values.reshape(mu.grid.shape)[tuple(nearest)]
        values = np.where(flagged, fill.reshape(-1), values)
    if threshold is not None:
        interior = values >= threshold
    elif mode == WINDING_2D:
        interior = np.rint(values) > 0
    else:
        interior = np.rint(values) >= 1
    return ScalarField(
        mu.grid, interior.astype(np.float64), flagged_nodes=mu.flagged_nodes
    )


def signed_distance(s: ScalarField, mask: ScalarField) -> ScalarField:
    """Positive inside, negative outside; magnitudes unchanged."""
    if mask.grid != s.grid:
        raise ValidationError("mask and distance field grids differ")
    inside = mask.values > 0.5
    return ScalarField(
        s.grid, np.where(inside, s.values, -s.values), s.flagged_nodes
    )
