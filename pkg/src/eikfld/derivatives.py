"""First and second derivatives of the soft-min distance as convolution ratios.

Every derivative is a ratio of convolutions against the same impulse field;
the denominator is the plain exponential-kernel convolution. Directional
kernel factors (component/radius ratios) are set to 0 at the zero offset,
which makes the source-node values well-defined but untrusted: they are
flagged rather than removed.

``method="fft"`` runs the convolution path at the configured precision;
``method="direct"`` evaluates the identical formulas per node with the
max-shifted exponentials (float64-stable at any tau). The two agree to the
cross-path tolerance checked in the acceptance suite.
"""

from __future__ import annotations

import numpy as np

from .convolution import FftConvolver, KernelField, assert_positive
from .distance import kernel_exp
from .errors import ValidationError
from .grid import GridSpec, PointSet, ScalarField, VectorField
from .precision import PrecisionConfig


class DirectionalKernels:
    """Samples of component/norm ratios on the kernel offset lattice.

    axis_over_r[a] = offset_a / |offset|, inv_r = 1 / |offset|, all zero at
    the zero offset. These are O(1) and O(1/h) values, kept in float64 even
    when the exponential factor is bigfloat.
    """

    def __init__(self, grid: GridSpec):
        offsets = [
            grid.spacing * np.arange(-(c - 1), c, dtype=np.float64)
            for c in grid.counts
        ]
        mesh = np.meshgrid(*offsets, indexing="ij")
        r = np.sqrt(sum(m * m for m in mesh))
        center = tuple(c - 1 for c in grid.counts)
        r_safe = r.copy()
        r_safe[center] = 1.0
        self.axis_over_r = []
        for m in mesh:
            f = m / r_safe
            f[center] = 0.0
            self.axis_over_r.append(f)
        inv = 1.0 / r_safe
        inv[center] = 0.0
        self.inv_r = inv
        self.shape = r.shape


def _scaled_kernel(base: KernelField, factor: np.ndarray) -> KernelField:
    """Pointwise product of a float64 factor with the exponential kernel."""
    return KernelField(base.spacing, factor * base.values)


def _flags(ps: PointSet) -> np.ndarray:
    return ps.distinct_nodes()


def gradient(
    ps: PointSet,
    grid: GridSpec,
    cfg: PrecisionConfig,
    method: str = "fft",
) -> VectorField:
    """Soft-min gradient: component a is (f_a * f conv g) / (f conv g)."""
    if method == "direct":
        ratios = _direct_ratios(ps, grid, cfg, _gradient_factors)
    elif method == "fft":
        ratios = _fft_ratios(ps, grid, cfg, _gradient_factors)
    else:
        raise ValidationError(f"unknown derivative method {method!r}")
    flagged = _flags(ps)
    comps = [ScalarField(grid, r, flagged) for r in ratios]
    return VectorField(comps)


def hessian_2d(
    ps: PointSet,
    grid: GridSpec,
    cfg: PrecisionConfig,
    method: str = "fft",
):
    """Second derivatives (S_xx, S_yy, S_xy) on a 2D grid.

    Each field is its convolution-ratio term plus the (1/tau) * gradient
    product correction; the gradient comes from the same convolution batch.
    """
    if grid.dim != 2:
        raise ValidationError("second derivatives are implemented for 2D grids")
    factors = _hessian_factors(cfg.tau)
    if method == "direct":
        ratios = _direct_ratios(ps, grid, cfg, factors)
    elif method == "fft":
        ratios = _fft_ratios(ps, grid, cfg, factors)
    else:
        raise ValidationError(f"unknown derivative method {method!r}")
    sx, sy, txx, tyy, txy = ratios
    inv_tau = 1.0 / cfg.tau
    sxx = txx + inv_tau * sx * sx
    syy = tyy + inv_tau * sy * sy
    sxy = txy + inv_tau * sx * sy
    flagged = _flags(ps)
    return (
        ScalarField(grid, sxx, flagged),
        ScalarField(grid, syy, flagged),
        ScalarField(grid, sxy, flagged),
    )


def gradient_magnitude(v: VectorField) -> ScalarField:
    """Pointwise Euclidean norm of the gradient components."""
    sq = sum(c.values.astype(np.float64) ** 2 for c in v.components)
    return ScalarField(v.grid, np.sqrt(sq), v.flagged_nodes)


def level_set_curvature(v: VectorField, sxx, syy, sxy) -> ScalarField:
    """2D level-set curvature assembled from gradient and Hessian fields."""
    gx = v.components[0].values
    gy = v.components[1].values
    num = sxx.values * gy**2 - 2.0 * sxy.values * gx * gy + syy.values * gx**2
    den = np.maximum((gx**2 + gy**2) ** 1.5, 1e-300)
    return ScalarField(v.grid, num / den, v.flagged_nodes)


# ---------------------------------------------------------------------------
# Shared kernel-factor definitions; the direct path reuses the same factor
# callbacks on per-node offset data so both paths evaluate the same formula.


def _gradient_factors(dk: DirectionalKernels):
    return list(dk.axis_over_r)


def _hessian_factors(tau: float):
    inv_tau = 1.0 / tau

    def make(dk):
        fc, fs = dk.axis_over_r
        fr = dk.inv_r
        return [
            fc,
            fs,
            -inv_tau * fc * fc + fs * fs * fr,
            -inv_tau * fs * fs + fc * fc * fr,
            -(inv_tau + fr) * fc * fs,
        ]

    return make


def _fft_ratios(ps, grid, cfg, make_factors):
    dk = DirectionalKernels(grid)
    base = kernel_exp(grid, cfg)
    kernels = [base] + [_scaled_kernel(base, f) for f in make_factors(dk)]
    conv = FftConvolver(grid, base.shape, cfg)
    from .distance import impulse_field

    outs = conv.convolve_many(kernels, impulse_field(ps, grid))
    den = outs[0]
    assert_positive(den, "gradient denominator")
    ratios = []
    for num in outs[1:]:
        q = num / den
        if q.dtype == object:
            q = np.array([float(v) for v in q.reshape(-1)], dtype=np.float64)
        ratios.append(np.asarray(q, dtype=np.float64).reshape(-1))
    return ratios


class _NodeOffsets:
    """Per-chunk offset ratios shaped like DirectionalKernels fields."""

    def __init__(self, diff: np.ndarray, dist: np.ndarray, zero: np.ndarray):
        safe = np.where(zero, 1.0, dist)
        self.axis_over_r = [
            np.where(zero, 0.0, diff[..., a] / safe) for a in range(diff.shape[-1])
        ]
        self.inv_r = np.where(zero, 0.0, 1.0 / safe)


def _direct_ratios(ps, grid, cfg, make_factors):
    from .distance import _NODE_CHUNK

    pts = grid.coords_of_flat(ps.distinct_nodes())
    nodes = grid.node_coords()
    tau = cfg.tau
    n_out = None
    acc = None
    for lo in range(0, nodes.shape[0], _NODE_CHUNK):
        hi = min(lo + _NODE_CHUNK, nodes.shape[0])
        diff = nodes[lo:hi, None, :] - pts[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        zero = dist == 0.0
        weights = np.exp(-(dist - dist.min(axis=1)[:, None]) / tau)
        factors = make_factors(_NodeOffsets(diff, dist, zero))
        if acc is None:
            n_out = len(factors)
            acc = [np.empty(nodes.shape[0]) for _ in range(n_out)]
        den = weights.sum(axis=1)
        for a, fac in enumerate(factors):
            acc[a][lo:hi] = (fac * weights).sum(axis=1) / den
    return acc
