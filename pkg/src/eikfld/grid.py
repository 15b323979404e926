"""Regular lattice, point-set and field containers, geometry ingestion.

All containers are frozen after construction and safe to share between
threads. Fields are stored row-major with the last axis fastest, which is
also the on-disk payload order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned regular lattice: origin, uniform spacing, node counts."""

    origin: tuple
    spacing: float
    counts: tuple

    def __post_init__(self):
        origin = tuple(float(v) for v in self.origin)
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "spacing", float(self.spacing))
        if not (1 <= self.dim <= 3):
            raise ValidationError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if len(origin) != len(counts):
            raise ValidationError("origin and counts must have equal length")
        if not (self.spacing > 0):
            raise ValidationError(f"spacing must be > 0, got {self.spacing}")
        if any(c < 2 for c in counts):
            raise ValidationError(f"need >= 2 nodes per axis, got {counts}")

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.counts))

    @property
    def shape(self) -> tuple:
        return self.counts

    @property
    def upper(self) -> tuple:
        return tuple(
            o + (c - 1) * self.spacing for o, c in zip(self.origin, self.counts)
        )

    @property
    def diagonal(self) -> float:
        return self.spacing * math.sqrt(sum((c - 1) ** 2 for c in self.counts))

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing * np.arange(self.counts[axis])

    def node_coords(self) -> np.ndarray:
        """All node world coordinates, shape (N, dim), row-major order."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def flat_to_multi(self, flat: np.ndarray) -> tuple:
        return np.unravel_index(np.asarray(flat), self.counts)

    def multi_to_flat(self, multi) -> np.ndarray:
        return np.ravel_multi_index(multi, self.counts)

    def coords_of_flat(self, flat: np.ndarray) -> np.ndarray:
        multi = np.stack(self.flat_to_multi(flat), axis=-1).astype(np.float64)
        return np.asarray(self.origin) + self.spacing * multi

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        lo = np.asarray(self.origin)
        hi = np.asarray(self.upper)
        return np.all((pts >= lo) & (pts <= hi), axis=1)


@dataclass(frozen=True)
class PointSet:
    """K source locations plus their snapped grid node indices (flat)."""

    points: np.ndarray
    snapped_indices: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        idx = np.asarray(self.snapped_indices, dtype=np.int64)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "snapped_indices", idx)
        if pts.shape[0] < 1:
            raise ValidationError("point-set must contain at least one point")
        if idx.shape[0] != pts.shape[0]:
            raise ValidationError("points and snapped_indices length mismatch")
        pts.setflags(write=False)
        idx.setflags(write=False)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def distinct_nodes(self) -> np.ndarray:
        """Snapped node indices with duplicates collapsed (impulse support)."""
        return np.unique(self.snapped_indices)

    @classmethod
    def from_node_indices(cls, grid: GridSpec, flat_indices) -> "PointSet":
        idx = np.asarray(flat_indices, dtype=np.int64)
        if idx.min() < 0 or idx.max() >= grid.num_nodes:
            raise ValidationError("node index out of bounds")
        return cls(points=grid.coords_of_flat(idx), snapped_indices=idx)


class ScalarField:
    """Node values on a grid, row-major (last axis fastest).

    Values are float64 for every public result; the bigfloat convolution
    pipeline passes object arrays of mpfr through here internally.
    ``flagged_nodes`` carries flat indices whose values an operation marked
    untrusted (e.g. derivative values at source nodes).
    """

    __slots__ = ("grid", "values", "flagged_nodes")

    def __init__(self, grid: GridSpec, values: np.ndarray, flagged_nodes=None):
        values = np.asarray(values)
        if values.size != grid.num_nodes:
            raise ValidationError(
                f"field size {values.size} != grid node count {grid.num_nodes}"
            )
        self.grid = grid
        self.values = values.reshape(-1)
        self.flagged_nodes = (
            None if flagged_nodes is None else np.asarray(flagged_nodes, dtype=np.int64)
        )

    def as_grid(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def check_finite(self):
        if self.values.dtype == object:
            import gmpy2

            ok = all(gmpy2.is_finite(v) for v in self.values)
        else:
            ok = bool(np.isfinite(self.values).all())
        if not ok:
            raise ValidationError("field contains non-finite values")

    def astype_float(self) -> "ScalarField":
        if self.values.dtype == np.float64:
            return self
        vals = np.array([float(v) for v in self.values], dtype=np.float64)
        return ScalarField(self.grid, vals, self.flagged_nodes)


class VectorField:
    """One ScalarField per spatial component, all on the same grid."""

    __slots__ = ("grid", "components")

    def __init__(self, components):
        comps = list(components)
        if not comps:
            raise ValidationError("vector field needs at least one component")
        grid = comps[0].grid
        for c in comps:
            if c.grid != grid:
                raise ValidationError("vector components live on different grids")
        self.grid = grid
        self.components = comps

    @property
    def flagged_nodes(self):
        return self.components[0].flagged_nodes


@dataclass(frozen=True)
class Curve2D:
    """Closed polyline; the successor of the last vertex is the first."""

    vertices: np.ndarray

    def __post_init__(self):
        verts = np.atleast_2d(np.asarray(self.vertices, dtype=np.float64))
        if verts.shape[1] != 2:
            raise ValidationError("curve vertices must be 2D")
        # A trailing repeat of the first vertex is an explicit closure marker.
        if verts.shape[0] > 1 and np.array_equal(verts[0], verts[-1]):
            verts = verts[:-1]
        if verts.shape[0] < 3:
            raise ValidationError("closed curve needs at least 3 distinct vertices")
        nxt = np.roll(verts, -1, axis=0)
        if np.any(np.all(verts == nxt, axis=1)):
            raise ValidationError("consecutive curve vertices must be distinct")
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)

    @property
    def size(self) -> int:
        return self.vertices.shape[0]

    def reversed(self) -> "Curve2D":
        return Curve2D(self.vertices[::-1].copy())


@dataclass(frozen=True)
class Surface3D:
    """Oriented triangle soup: per-triangle incenter and outward normal."""

    triangles: np.ndarray
    centers: np.ndarray
    normals: np.ndarray

    def __post_init__(self):
        tris = np.asarray(self.triangles, dtype=np.float64)
        centers = np.asarray(self.centers, dtype=np.float64)
        normals = np.asarray(self.normals, dtype=np.float64)
        if tris.ndim != 3 or tris.shape[1:] != (3, 3):
            raise ValidationError("triangles must have shape (K, 3, 3)")
        k = tris.shape[0]
        if centers.shape != (k, 3) or normals.shape != (k, 3):
            raise ValidationError("centers/normals shape mismatch")
        norms = np.linalg.norm(normals, axis=1)
        if np.any(norms <= 0):
            raise ValidationError("every normal must have positive norm")
        # Incenters must sit in their triangle's plane.
        e1 = tris[:, 1] - tris[:, 0]
        e2 = tris[:, 2] - tris[:, 0]
        plane_n = np.cross(e1, e2)
        scale = np.linalg.norm(e1, axis=1) + np.linalg.norm(e2, axis=1)
        dist = np.abs(np.einsum("ij,ij->i", centers - tris[:, 0], plane_n))
        dist /= np.linalg.norm(plane_n, axis=1)
        if np.any(dist > 1e-9 * scale):
            raise ValidationError("triangle centers do not lie in-plane")
        for arr in (tris, centers, normals):
            arr.setflags(write=False)
        object.__setattr__(self, "triangles", tris)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "normals", normals)

    @property
    def size(self) -> int:
        return self.triangles.shape[0]


def snap_points(points, grid: GridSpec) -> PointSet:
    """Map points to their nearest grid nodes, ties broken toward lower index.

    Every input point must lie inside the grid bounding box (inclusive).
    Duplicates in the result are deliberate: impulse construction collapses
    them later.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != grid.dim:
        raise ValidationError(
            f"points are {pts.shape[1]}D but grid is {grid.dim}D"
        )
    inside = grid.contains(pts)
    if not inside.all():
        bad = pts[~inside][0]
        raise ValidationError(f"point {tuple(bad)} lies outside the grid bounds")
    t = (pts - np.asarray(grid.origin)) / grid.spacing
    # ceil(t - 1/2): nearest node, exact half-offsets go to the lower index.
    idx = np.ceil(t - 0.5).astype(np.int64)
    idx = np.clip(idx, 0, np.asarray(grid.counts) - 1)
    flat = grid.multi_to_flat(tuple(idx[:, a] for a in range(grid.dim)))
    return PointSet(points=pts, snapped_indices=flat)


def triangulate_and_orient(vertices, faces) -> Surface3D:
    """Build an oriented Surface3D from raw vertices and triangle faces.

    Normals are unit cross-products of edge vectors, flipped so that
    <center, normal> >= 0. That rule requires the origin to be strictly
    inside the surface (star-shaped about the origin); meshes violating it
    need a coherent orientation pass we deliberately do not provide.
    """
    verts = np.asarray(vertices, dtype=np.float64)
    faces = np.asarray(faces, dtype=np.int64)
    if verts.ndim != 2 or verts.shape[1] != 3:
        raise ValidationError("vertices must have shape (V, 3)")
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise ValidationError("faces must have shape (K, 3)")
    if faces.min() < 0 or faces.max() >= verts.shape[0]:
        raise ValidationError("face index out of range")
    tris = verts[faces]
    a = tris[:, 0]
    b = tris[:, 1]
    c = tris[:, 2]
    cross = np.cross(b - a, c - a)
    area2 = np.linalg.norm(cross, axis=1)
    edge_scale = np.linalg.norm(b - a, axis=1) + np.linalg.norm(c - a, axis=1)
    degenerate = area2 <= 1e-14 * np.maximum(edge_scale**2, 1e-300)
    if degenerate.any():
        raise ValidationError(
            f"degenerate (zero-area) triangle at index {int(np.argmax(degenerate))}"
        )
    normals = cross / area2[:, None]
    # Incenter: edge-length weighted vertex average.
    la = np.linalg.norm(c - b, axis=1)
    lb = np.linalg.norm(a - c, axis=1)
    lc = np.linalg.norm(b - a, axis=1)
    centers = (la[:, None] * a + lb[:, None] * b + lc[:, None] * c) / (
        (la + lb + lc)[:, None]
    )
    flip = np.einsum("ij,ij->i", centers, normals) < 0
    normals[flip] *= -1.0
    return Surface3D(triangles=tris, centers=centers, normals=normals)


def load_points_csv(path) -> np.ndarray:
    """Point/curve file: one point per line, 2 or 3 comma-separated fields."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p for p in line.replace(",", " ").split() if p]
            if len(parts) not in (2, 3):
                raise ValidationError(
                    f"{path}:{lineno}: expected 2 or 3 fields, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-numeric field") from None
    if not rows:
        raise ValidationError(f"{path}: no points found")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValidationError(f"{path}: mixed 2D/3D rows")
    return np.asarray(rows, dtype=np.float64)


def load_mesh(path) -> Surface3D:
    """Mesh file: CSV triangle soup (9 fields/line) or OBJ subset (v/f only)."""
    text = open(path, "r", encoding="utf-8").read()
    if any(line.lstrip().startswith(("v ", "f ")) for line in text.splitlines()):
        return _load_obj(path, text)
    tris = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p for p in line.replace(",", " ").split() if p]
        if len(parts) != 9:
            raise ValidationError(
                f"{path}:{lineno}: triangle soup rows need 9 fields, got {len(parts)}"
            )
        tris.append([float(p) for p in parts])
    if not tris:
        raise ValidationError(f"{path}: no triangles found")
    soup = np.asarray(tris, dtype=np.float64).reshape(-1, 3, 3)
    verts = soup.reshape(-1, 3)
    faces = np.arange(verts.shape[0]).reshape(-1, 3)
    return triangulate_and_orient(verts, faces)


def _load_obj(path, text) -> Surface3D:
    verts = []
    faces = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tag, _, rest = line.partition(" ")
        if tag == "v":
            parts = rest.split()
            if len(parts) < 3:
                raise ValidationError(f"{path}:{lineno}: bad vertex line")
            verts.append([float(p) for p in parts[:3]])
        elif tag == "f":
            parts = rest.split()
            if len(parts) != 3:
                raise ValidationError(
                    f"{path}:{lineno}: only triangular faces are supported"
                )
            faces.append([int(p.split("/")[0]) - 1 for p in parts])
        # Any other tag is outside the documented subset; ignore quietly.
    if not verts or not faces:
        raise ValidationError(f"{path}: OBJ subset needs v and f lines")
    return triangulate_and_orient(np.asarray(verts), np.asarray(faces))
