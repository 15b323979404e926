"""Fixture fields produced by the eikfld CLI, consumed as opaque files."""

import subprocess
import sys

import numpy as np
import pytest


def run_eikfld(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "eikfld.cli", *args], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    return proc


def star_polygon(n=240, r0=0.085, wobble=0.25, seed=5):
    rng = np.random.default_rng(seed)
    amp = wobble * rng.uniform(0.3, 1.0, 4) / np.arange(1, 5)
    phase = rng.uniform(0, 2 * np.pi, 4)
    theta = np.linspace(0, 2 * np.pi, n, endpoint=False)
    r = r0 * (1 + sum(a * np.cos((m + 1) * theta + p)
                      for m, (a, p) in enumerate(zip(amp, phase))))
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


@pytest.fixture(scope="session")
def fixtures(tmp_path_factory):
    root = tmp_path_factory.mktemp("fields")
    grid2d = ["--min=-0.125,-0.125", "--max", "0.125,0.125",
              "--spacing", str(1 / 256)]

    pts_path = root / "pts.csv"
    rng = np.random.default_rng(11)
    pts = rng.uniform(-0.1, 0.1, size=(25, 2))
    np.savetxt(pts_path, pts, delimiter=",")

    out = {}
    for method, name in (("exact", "R"), ("direct", "S"), ("sweep", "sweep")):
        path = root / f"{name}.fld"
        run_eikfld("dt", "--points", str(pts_path), *grid2d, "--tau", "3e-4",
                   "--method", method, "--out", str(path))
        out[name] = str(path)

    curve_path = root / "curve.csv"
    np.savetxt(curve_path, star_polygon(), delimiter=",")
    curve_pts = root / "curve_sources.csv"
    np.savetxt(curve_pts, star_polygon(), delimiter=",")
    run_eikfld("grad", "--points", str(curve_pts), *grid2d, "--tau", "3e-4",
               "--method", "direct", "--with-magnitude",
               "--out-prefix", str(root) + "/g_")
    out["grad_x"] = str(root / "g_S_x.fld")
    out["grad_y"] = str(root / "g_S_y.fld")
    out["grad_mag"] = str(root / "g_grad_mag.fld")

    run_eikfld("sign", "--curve", str(curve_path), *grid2d,
               "--mu-out", str(root / "mu.fld"),
               "--mask-out", str(root / "mask.fld"))
    out["mu"] = str(root / "mu.fld")
    out["mask"] = str(root / "mask.fld")

    pts3_path = root / "pts3.csv"
    np.savetxt(pts3_path, rng.uniform(-0.15, 0.15, size=(6, 3)), delimiter=",")
    grid3d = ["--min=-0.25,-0.25,-0.25", "--max", "0.25,0.25,0.25",
              "--spacing", str(1 / 64)]
    for method, name in (("direct", "S3"), ("exact", "R3"), ("sweep", "sweep3")):
        path3 = root / f"{name}.fld"
        run_eikfld("dt", "--points", str(pts3_path), *grid3d, "--tau", "1e-3",
                   "--method", method, "--out", str(path3))
        out[name] = str(path3)
    return out
