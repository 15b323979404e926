"""Synthetic geometry: silhouette-like curves, polygons, canonical meshes.

These shapes feed the experiment drivers and tests. Everything takes an
explicit seeded numpy Generator, so shape sets are reproducible.
Membership oracles (even-odd ray casting, analytic solids) live here too;
they deliberately share no code with the winding/degree pipeline.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import Curve2D, Surface3D, triangulate_and_orient


def silhouette_curve(
    rng: np.random.Generator,
    center=(0.0, 0.0),
    base_radius: float = 0.08,
    wobble: float = 0.35,
    harmonics: int = 5,
    n_points: int = 1200,
) -> Curve2D:
    """Smooth star-shaped blob: radius modulated by random low harmonics."""
    amps = wobble * rng.uniform(0.2, 1.0, harmonics) / np.arange(1, harmonics + 1)
    phases = rng.uniform(0.0, 2.0 * math.pi, harmonics)
    theta = np.linspace(0.0, 2.0 * math.pi, n_points, endpoint=False)
    r = base_radius * (
        1.0
        + sum(
            a * np.cos((m + 1) * theta + p)
            for m, (a, p) in enumerate(zip(amps, phases))
        )
    )
    r = np.maximum(r, 0.2 * base_radius)
    verts = np.stack(
        [center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)], axis=1
    )
    return Curve2D(verts)


def random_polygon(
    rng: np.random.Generator,
    center=(0.0, 0.0),
    radius: float = 0.08,
    n_vertices: int = 12,
) -> Curve2D:
    """Random star-shaped (hence simple) polygon, counterclockwise."""
    theta = np.sort(rng.uniform(0.0, 2.0 * math.pi, n_vertices))
    # Keep angular gaps non-degenerate.
    while np.min(np.diff(np.concatenate([theta, [theta[0] + 2 * math.pi]]))) < 1e-3:
        theta = np.sort(rng.uniform(0.0, 2.0 * math.pi, n_vertices))
    r = rng.uniform(0.35 * radius, radius, n_vertices)
    verts = np.stack(
        [center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)], axis=1
    )
    return Curve2D(verts)


def densify_curve(curve: Curve2D, max_segment: float) -> Curve2D:
    """Resample so no edge exceeds max_segment (winding quadrature density)."""
    verts = curve.vertices
    out = []
    for i in range(verts.shape[0]):
        a = verts[i]
        b = verts[(i + 1) % verts.shape[0]]
        steps = max(1, int(math.ceil(np.linalg.norm(b - a) / max_segment)))
        for s in range(steps):
            out.append(a + (b - a) * (s / steps))
    return Curve2D(np.asarray(out))


def circle_polygon(center=(0.0, 0.0), radius=0.08, n_vertices=64) -> Curve2D:
    theta = np.linspace(0.0, 2.0 * math.pi, n_vertices, endpoint=False)
    verts = np.stack(
        [center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)],
        axis=1,
    )
    return Curve2D(verts)


# ---------------------------------------------------------------------------
# Canonical 3D meshes, centered at the origin (star-shaped, so the
# dot-with-position orientation rule applies).


def cube_mesh(half: float = 0.08, divisions: int = 16) -> Surface3D:
    verts = []
    faces = []
    lin = np.linspace(-half, half, divisions + 1)

    def add_face(fixed_axis, sign):
        base = len(verts)
        for a in lin:
            for b in lin:
                p = [0.0, 0.0, 0.0]
                p[fixed_axis] = sign * half
                p[(fixed_axis + 1) % 3] = a
                p[(fixed_axis + 2) % 3] = b
                verts.append(p)
        n = divisions + 1
        for i in range(divisions):
            for j in range(divisions):
                v00 = base + i * n + j
                v10 = v00 + n
                v01 = v00 + 1
                v11 = v10 + 1
                faces.append([v00, v10, v11])
                faces.append([v00, v11, v01])

    for axis in range(3):
        add_face(axis, +1)
        add_face(axis, -1)
    return triangulate_and_orient(np.asarray(verts), np.asarray(faces))


def sphere_mesh(radius: float = 0.09, rings: int = 28, segments: int = 56) -> Surface3D:
    verts = [[0.0, 0.0, radius]]
    for i in range(1, rings):
        phi = math.pi * i / rings
        for j in range(segments):
            th = 2.0 * math.pi * j / segments
            verts.append(
                [
                    radius * math.sin(phi) * math.cos(th),
                    radius * math.sin(phi) * math.sin(th),
                    radius * math.cos(phi),
                ]
            )
    verts.append([0.0, 0.0, -radius])
    faces = []
    for j in range(segments):
        faces.append([0, 1 + j, 1 + (j + 1) % segments])
    for i in range(rings - 2):
        row0 = 1 + i * segments
        row1 = row0 + segments
        for j in range(segments):
            a = row0 + j
            b = row0 + (j + 1) % segments
            c = row1 + j
            d = row1 + (j + 1) % segments
            faces.append([a, c, d])
            faces.append([a, d, b])
    last = len(verts) - 1
    row = 1 + (rings - 2) * segments
    for j in range(segments):
        faces.append([last, row + (j + 1) % segments, row + j])
    return triangulate_and_orient(np.asarray(verts), np.asarray(faces))


def cylinder_mesh(
    radius: float = 0.07, half_height: float = 0.09, segments: int = 48, stacks: int = 12
) -> Surface3D:
    verts = []
    faces = []
    zs = np.linspace(-half_height, half_height, stacks + 1)
    for z in zs:
        for j in range(segments):
            th = 2.0 * math.pi * j / segments
            verts.append([radius * math.cos(th), radius * math.sin(th), z])
    for i in range(stacks):
        r0 = i * segments
        r1 = r0 + segments
        for j in range(segments):
            a = r0 + j
            b = r0 + (j + 1) % segments
            c = r1 + j
            d = r1 + (j + 1) % segments
            faces.append([a, c, d])
            faces.append([a, d, b])
    top = len(verts)
    verts.append([0.0, 0.0, half_height])
    bottom = len(verts)
    verts.append([0.0, 0.0, -half_height])
    r_top = stacks * segments
    for j in range(segments):
        faces.append([top, r_top + j, r_top + (j + 1) % segments])
        faces.append([bottom, (j + 1) % segments, j])
    return triangulate_and_orient(np.asarray(verts), np.asarray(faces))


def blob_mesh(
    rng: np.random.Generator, base_radius: float = 0.08, wobble: float = 0.25,
    rings: int = 24, segments: int = 48,
) -> Surface3D:
    """Lumpy deformed sphere used as the bundled stand-in 3D scan."""
    l_max = 3
    coeffs = {
        (l, m): wobble * rng.uniform(-1.0, 1.0) / (l + 1)
        for l in range(1, l_max + 1)
        for m in range(0, l + 1)
    }

    def radius_at(phi, th):
        r = 1.0
        for (l, m), c in coeffs.items():
            r += c * math.cos(l * phi) * math.cos(m * th)
        # Clamp so every vertex stays inside a +/-1.5*base_radius box.
        return base_radius * min(max(r, 0.35), 1.5)

    verts = [[0.0, 0.0, radius_at(0.0, 0.0)]]
    for i in range(1, rings):
        phi = math.pi * i / rings
        for j in range(segments):
            th = 2.0 * math.pi * j / segments
            r = radius_at(phi, th)
            verts.append(
                [
                    r * math.sin(phi) * math.cos(th),
                    r * math.sin(phi) * math.sin(th),
                    r * math.cos(phi),
                ]
            )
    verts.append([0.0, 0.0, -radius_at(math.pi, 0.0)])
    faces = []
    for j in range(segments):
        faces.append([0, 1 + j, 1 + (j + 1) % segments])
    for i in range(rings - 2):
        row0 = 1 + i * segments
        row1 = row0 + segments
        for j in range(segments):
            a = row0 + j
            b = row0 + (j + 1) % segments
            c = row1 + j
            d = row1 + (j + 1) % segments
            faces.append([a, c, d])
            faces.append([a, d, b])
    last = len(verts) - 1
    row = 1 + (rings - 2) * segments
    for j in range(segments):
        faces.append([last, row + (j + 1) % segments, row + j])
    return triangulate_and_orient(np.asarray(verts), np.asarray(faces))


# ---------------------------------------------------------------------------
# Membership oracles (independent of the winding/degree pipeline).


def points_in_polygon(points: np.ndarray, curve: Curve2D) -> np.ndarray:
    """Even-odd ray casting: count x-ray crossings per query point."""
    pts = np.atleast_2d(points)
    verts = curve.vertices
    x1 = verts[:, 0]
    y1 = verts[:, 1]
    x2 = np.roll(x1, -1)
    y2 = np.roll(y1, -1)
    inside = np.zeros(pts.shape[0], dtype=bool)
    for lo in range(0, pts.shape[0], 4096):
        hi = min(lo + 4096, pts.shape[0])
        px = pts[lo:hi, 0][:, None]
        py = pts[lo:hi, 1][:, None]
        straddles = (y1[None, :] > py) != (y2[None, :] > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = x1[None, :] + (py - y1[None, :]) * (x2 - x1)[None, :] / (
                y2 - y1
            )[None, :]
        crossings = np.sum(straddles & (px < x_cross), axis=1)
        inside[lo:hi] = (crossings % 2) == 1
    return inside


def min_distance_to_points(points: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Nearest-target distance per query point (exact, KD-tree accelerated)."""
    from scipy.spatial import cKDTree

    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    tgt = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    dist, _ = cKDTree(tgt).query(pts, k=1)
    return np.asarray(dist, dtype=np.float64)


def distance_to_curve(points: np.ndarray, curve: Curve2D) -> np.ndarray:
    """Distance from each query point to the nearest curve vertex."""
    return min_distance_to_points(points, curve.vertices)


def in_cube(points: np.ndarray, half: float) -> np.ndarray:
    return np.all(np.abs(points) <= half, axis=1)


def in_sphere(points: np.ndarray, radius: float) -> np.ndarray:
    return np.einsum("ij,ij->i", points, points) <= radius**2


def in_cylinder(points: np.ndarray, radius: float, half_height: float) -> np.ndarray:
    radial = points[:, 0] ** 2 + points[:, 1] ** 2 <= radius**2
    return radial & (np.abs(points[:, 2]) <= half_height)
