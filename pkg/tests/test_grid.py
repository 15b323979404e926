import numpy as np
import pytest

from eikfld.errors import ValidationError
from eikfld.grid import (
    Curve2D,
    GridSpec,
    PointSet,
    load_mesh,
    load_points_csv,
    snap_points,
    triangulate_and_orient,
)
from eikfld.shapes import cube_mesh, cylinder_mesh, sphere_mesh

from conftest import rng_for


class TestGridSpec:
    def test_invariants(self):
        g = GridSpec(origin=(0.0, 1.0), spacing=0.5, counts=(4, 6))
        assert g.num_nodes == 24
        assert g.dim == 2
        assert g.upper == (1.5, 3.5)

    def test_rejects_bad_spacing(self):
        with pytest.raises(ValidationError):
            GridSpec(origin=(0.0,), spacing=0.0, counts=(4,))

    def test_rejects_single_node_axis(self):
        with pytest.raises(ValidationError):
            GridSpec(origin=(0.0, 0.0), spacing=0.1, counts=(4, 1))

    def test_rejects_dim_4(self):
        with pytest.raises(ValidationError):
            GridSpec(origin=(0.0,) * 4, spacing=0.1, counts=(3,) * 4)

    @pytest.mark.parametrize(
        "origin,spacing,counts",
        [
            ((0.0, 0.0, 0.0), 1.0 / 128.0, (100, 100, 100)),
            ((-0.3, 0.7), 0.1, (1000, 1000)),
            ((2.0,), 1.0 / 512.0, (1000,)),
        ],
    )
    def test_index_coordinate_bijection(self, origin, spacing, counts):
        # Exhaustive round-trip on up to 1e6 nodes: node -> coord -> snap -> node.
        grid = GridSpec(origin=origin, spacing=spacing, counts=counts)
        coords = grid.node_coords()
        ps = snap_points(coords, grid)
        assert np.array_equal(ps.snapped_indices, np.arange(grid.num_nodes))


class TestSnap:
    def test_point_on_node_is_identity(self):
        grid = GridSpec(origin=(0.0, 0.0), spacing=0.25, counts=(5, 5))
        ps = snap_points([(0.5, 0.75)], grid)
        assert ps.snapped_indices[0] == grid.multi_to_flat(([2], [3]))[0]

    def test_cell_center_ties_to_lower_node_1d(self):
        grid = GridSpec(origin=(0.0,), spacing=1.0, counts=(4,))
        ps = snap_points([(1.5,)], grid)
        assert ps.snapped_indices[0] == 1

    def test_5000_random_points_in_bounds(self):
        grid = GridSpec(origin=(-0.121, -0.121), spacing=1.0 / 512.0, counts=(125, 125))
        rng = rng_for(11)
        lo = np.asarray(grid.origin)
        hi = np.asarray(grid.upper)
        pts = lo + (hi - lo) * rng.random((5000, 2))
        ps = snap_points(pts, grid)
        assert ps.size == 5000
        assert ps.snapped_indices.min() >= 0
        assert ps.snapped_indices.max() < grid.num_nodes
        # Snap displacement per coordinate <= h/2.
        snapped = grid.coords_of_flat(ps.snapped_indices)
        assert np.abs(snapped - pts).max() <= grid.spacing / 2 + 1e-15

    def test_snap_is_idempotent(self):
        grid = GridSpec(origin=(0.0, 0.0), spacing=0.1, counts=(12, 9))
        pts = rng_for(3).random((50, 2)) * np.asarray(grid.upper)
        once = snap_points(pts, grid)
        twice = snap_points(grid.coords_of_flat(once.snapped_indices), grid)
        assert np.array_equal(once.snapped_indices, twice.snapped_indices)

    def test_out_of_bounds_names_point(self):
        grid = GridSpec(origin=(0.0, 0.0), spacing=0.1, counts=(5, 5))
        with pytest.raises(ValidationError, match="0.9"):
            snap_points([(0.2, 0.2), (0.9, 0.2)], grid)

    def test_duplicates_kept_in_pointset_collapsed_in_impulses(self):
        grid = GridSpec(origin=(0.0, 0.0), spacing=0.1, counts=(5, 5))
        ps = snap_points([(0.2, 0.2), (0.21, 0.2), (0.4, 0.4)], grid)
        assert ps.size == 3
        assert ps.distinct_nodes().size == 2


class TestSurfaces:
    def test_cube_normals_point_away_from_origin(self):
        mesh = cube_mesh(half=0.5, divisions=2)
        dots = np.einsum("ij,ij->i", mesh.centers, mesh.normals)
        assert (dots > 0).all()

    def test_sphere_normals_parallel_to_incenters(self):
        # Equilateral facets inscribed in a sphere: the normal passes through
        # the incenter exactly, so parallelism holds to rounding.
        phi = (1.0 + np.sqrt(5.0)) / 2.0
        verts = np.array(
            [
                [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
                [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
                [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
            ],
            dtype=np.float64,
        )
        verts /= np.linalg.norm(verts, axis=1)[:, None]
        faces = np.array(
            [
                [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
                [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
                [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
                [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
            ]
        )
        mesh = triangulate_and_orient(verts, faces)
        c = mesh.centers / np.linalg.norm(mesh.centers, axis=1)[:, None]
        cosang = np.clip(np.einsum("ij,ij->i", c, mesh.normals), -1.0, 1.0)
        assert np.arccos(cosang).max() < 1e-6
        # The UV-facet generator only approximates parallelism.
        uv = sphere_mesh(radius=1.0, rings=24, segments=48)
        c = uv.centers / np.linalg.norm(uv.centers, axis=1)[:, None]
        cosang = np.clip(np.einsum("ij,ij->i", c, uv.normals), -1.0, 1.0)
        assert np.arccos(cosang).max() < 0.1

    def test_cylinder_orientation_dots_positive(self):
        mesh = cylinder_mesh(radius=0.07, half_height=0.09)
        dots = np.einsum("ij,ij->i", mesh.centers, mesh.normals)
        assert (dots > 0).all()

    def test_degenerate_triangle_rejected_with_index(self):
        verts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        with pytest.raises(ValidationError, match="index 0"):
            triangulate_and_orient(verts, np.array([[0, 1, 2]]))

    def test_unit_normals(self):
        mesh = sphere_mesh(radius=0.09)
        assert np.allclose(np.linalg.norm(mesh.normals, axis=1), 1.0)


class TestCurve:
    def test_needs_three_vertices(self):
        with pytest.raises(ValidationError):
            Curve2D(np.array([[0.0, 0.0], [1.0, 0.0]]))

    def test_rejects_repeated_consecutive(self):
        with pytest.raises(ValidationError):
            Curve2D(np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))

    def test_trailing_closure_vertex_dropped(self):
        c = Curve2D(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
        assert c.size == 3


class TestGeometryFiles:
    def test_points_csv_roundtrip(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("0.5,0.25\n0.125,0.75\n# comment\n1.0,1.0\n")
        pts = load_points_csv(path)
        assert pts.shape == (3, 2)
        assert pts[1, 1] == 0.75

    def test_points_csv_rejects_mixed_width(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("0.5,0.25\n0.1,0.2,0.3\n")
        with pytest.raises(ValidationError):
            load_points_csv(path)

    def test_mesh_csv_soup(self, tmp_path):
        path = tmp_path / "tri.csv"
        path.write_text(
            "0.1,0,0, 0,0.1,0, 0,0,0.1\n-0.1,0,0, 0,-0.1,0, 0,0,-0.1\n"
        )
        mesh = load_mesh(path)
        assert mesh.size == 2
        assert (np.einsum("ij,ij->i", mesh.centers, mesh.normals) >= 0).all()

    def test_obj_subset(self, tmp_path):
        path = tmp_path / "m.obj"
        path.write_text(
            "v 0.1 0 0\nv 0 0.1 0\nv 0 0 0.1\nf 1 2 3\n"
        )
        mesh = load_mesh(path)
        assert mesh.size == 1

    def test_obj_rejects_quads(self, tmp_path):
        path = tmp_path / "m.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
        with pytest.raises(ValidationError):
            load_mesh(path)


def test_pointset_requires_points():
    with pytest.raises(ValidationError):
        PointSet(points=np.empty((0, 2)), snapped_indices=np.empty(0, dtype=int))
