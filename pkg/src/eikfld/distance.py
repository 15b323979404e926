"""Unsigned distance fields: FFT path, stable direct path, exact oracle.

The FFT path follows the convolution algorithm exactly: sample the
exponential kernel, place unit impulses at the snapped sources, convolve,
take -tau * log. The direct path evaluates the same soft-min formula per
node with a max-shifted log-sum-exp, which never underflows in float64 and
serves as the arithmetic-independent reference for the FFT path.
"""

from __future__ import annotations

import numpy as np

from .convolution import FftConvolver, KernelField, assert_positive
from .errors import PrecisionError, ValidationError
from .grid import GridSpec, PointSet, ScalarField
from .precision import PrecisionConfig, bigfloat_context, log_bound

_NODE_CHUNK = 2048


def kernel_exp(grid: GridSpec, cfg: PrecisionConfig) -> KernelField:
    """Sample exp(-|offset|/tau) on the full offset lattice of the grid.

    Offsets run over [-(c-1), c-1] per axis so every node-pair difference
    is covered. In bigfloat mode the samples are mpfr values computed from
    exact integer offsets, so exp(-1000) survives where float64 flushes to 0.
    """
    offsets = [np.arange(-(c - 1), c) for c in grid.counts]
    mesh = np.meshgrid(*offsets, indexing="ij")
    r2int = sum(m.astype(np.int64) ** 2 for m in mesh)
    if not cfg.is_bigfloat:
        r = grid.spacing * np.sqrt(r2int.astype(np.float64))
        return KernelField(grid.spacing, np.exp(-r / cfg.tau))
    import gmpy2
    from gmpy2 import mpfr

    with bigfloat_context(cfg.bits):
        h = mpfr(grid.spacing)
        tau = mpfr(cfg.tau)
        scale = h / tau
        uniq, inverse = np.unique(r2int.reshape(-1), return_inverse=True)
        table = np.empty(uniq.shape[0], dtype=object)
        for i, q in enumerate(uniq):
            table[i] = gmpy2.exp(-gmpy2.sqrt(mpfr(int(q))) * scale)
        values = table[inverse].reshape(r2int.shape)
    return KernelField(grid.spacing, values)


def impulse_field(ps: PointSet, grid: GridSpec) -> ScalarField:
    """Kronecker impulse field: 1 at source nodes, 0 elsewhere.

    Duplicate snapped sources collapse to a single unit impulse.
    """
    nodes = ps.distinct_nodes()
    if nodes[0] < 0 or nodes[-1] >= grid.num_nodes:
        raise ValidationError("snapped index out of grid bounds")
    values = np.zeros(grid.num_nodes, dtype=np.float64)
    values[nodes] = 1.0
    return ScalarField(grid, values)


def phi_fft(
    ps: PointSet,
    grid: GridSpec,
    cfg: PrecisionConfig,
    convolver: FftConvolver | None = None,
    kernel_hat: np.ndarray | None = None,
) -> ScalarField:
    """Sum of shifted exponential kernels via one zero-padded convolution.

    ``convolver``/``kernel_hat`` let callers reuse the kernel transform
    across trials that share grid and tau.
    """
    g = impulse_field(ps, grid)
    if convolver is None:
        kernel = kernel_exp(grid, cfg)
        convolver = FftConvolver(grid, kernel.shape, cfg)
        values = convolver.convolve(kernel, g)
    elif kernel_hat is None:
        values = convolver.convolve(kernel_exp(grid, cfg), g)
    else:
        g_hat = convolver.impulse_hat(g)
        values = convolver.inverse_to_grid(convolver.product(kernel_hat, g_hat))
    assert_positive(values, "phi")
    return ScalarField(grid, values.reshape(-1))


def s_from_phi(phi: ScalarField, cfg: PrecisionConfig) -> ScalarField:
    """S = -tau * log(phi), returned as float64."""
    vals = phi.values
    if vals.dtype == object:
        import gmpy2

        with bigfloat_context(cfg.bits if cfg.is_bigfloat else 64):
            if any(v <= 0 for v in vals):
                raise PrecisionError(
                    "phi <= 0: arithmetic underflow; increase precision bits"
                )
            out = np.fromiter(
                (float(-cfg.tau * gmpy2.log(v)) for v in vals),
                dtype=np.float64,
                count=vals.size,
            )
    else:
        if (vals <= 0).any():
            raise PrecisionError(
                "phi <= 0: native64 underflow; rerun with --precision big:<bits>"
            )
        out = -cfg.tau * np.log(vals)
    return ScalarField(phi.grid, out)


def s_fft(
    ps: PointSet,
    grid: GridSpec,
    cfg: PrecisionConfig,
    convolver: FftConvolver | None = None,
    kernel_hat: np.ndarray | None = None,
) -> ScalarField:
    """Composed pipeline: convolution then log recovery."""
    return s_from_phi(phi_fft(ps, grid, cfg, convolver, kernel_hat), cfg)


def _distance_chunks(grid: GridSpec, points: np.ndarray):
    nodes = grid.node_coords()
    for lo in range(0, nodes.shape[0], _NODE_CHUNK):
        hi = min(lo + _NODE_CHUNK, nodes.shape[0])
        diff = nodes[lo:hi, None, :] - points[None, :, :]
        yield lo, hi, np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def s_direct(ps: PointSet, grid: GridSpec, cfg: PrecisionConfig) -> ScalarField:
    """Per-node soft-min over the original (unsnapped) source coordinates.

    Uses the exact rearrangement S = R - tau*log(sum_k exp(-(d_k - R)/tau)),
    so float64 suffices for any tau; the shifted exponent is always <= 0.
    """
    return s_direct_multi(ps, grid, [cfg.tau])[0]


def s_direct_multi(ps: PointSet, grid: GridSpec, taus) -> list:
    """Soft-min fields for several tau values sharing one distance pass."""
    pts = ps.points
    taus = [float(t) for t in taus]
    outs = [np.empty(grid.num_nodes, dtype=np.float64) for _ in taus]
    for lo, hi, d in _distance_chunks(grid, pts):
        r = d.min(axis=1)
        shifted = d - r[:, None]
        for out, tau in zip(outs, taus):
            out[lo:hi] = r - tau * np.log(np.exp(-shifted / tau).sum(axis=1))
    return [ScalarField(grid, out) for out in outs]


def r_exact(points, grid: GridSpec) -> ScalarField:
    """Exact distance oracle: min over sources of the Euclidean distance.

    KD-tree accelerated; the nearest-neighbor distance is the same
    coordinate-difference arithmetic as the brute-force scan (exactly zero
    at coincident points), which the test suite re-verifies independently.
    """
    from scipy.spatial import cKDTree

    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != grid.dim:
        raise ValidationError("point dimensionality does not match grid")
    dist, _ = cKDTree(pts).query(grid.node_coords(), k=1)
    return ScalarField(grid, np.asarray(dist, dtype=np.float64))


def error_bound(cfg: PrecisionConfig, k: int) -> float:
    """Tight soft-min bound: |R - S| <= tau * log K."""
    return log_bound(cfg.tau, k)


def clamp_nonnegative(field: ScalarField) -> ScalarField:
    """max(S, 0) for consumers that cannot tolerate the soft-min undershoot."""
    return ScalarField(field.grid, np.maximum(field.values, 0.0), field.flagged_nodes)
