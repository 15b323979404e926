"""Multi-dimensional FFT engine and zero-padded linear convolution.

Two arithmetic backends sit behind one contract:

* native64 — scipy.fft (pocketfft), any axis length.
* bigfloat — an iterative radix-2 complex FFT over numpy object arrays of
  gmpy2 mpc values, power-of-two axis lengths, twiddles precomputed at the
  working precision.

Convolution is always LINEAR: both operands are zero-padded to at least
grid + kernel - 1 per axis (rounded up to the backend's preferred sizes),
so an impulse at one grid corner never wraps around to the opposite one.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import gmpy2
import numpy as np
import scipy.fft as _sfft
from gmpy2 import mpc, mpfr

from .errors import PrecisionError, ValidationError
from .grid import GridSpec, ScalarField
from .precision import BIGFLOAT, PrecisionConfig, bigfloat_context


@dataclass(frozen=True)
class KernelField:
    """Kernel samples on the offset lattice [-extent, +extent] per axis.

    ``values[i]`` holds the sample at offset (i - center) * spacing along
    each axis. dtype is float64 (native mode) or object/mpfr (bigfloat).
    """

    spacing: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if any(s % 2 == 0 for s in vals.shape):
            raise ValidationError("kernel axes must have odd length (centered)")
        object.__setattr__(self, "values", vals)
        if vals.dtype != object and not np.isfinite(vals).all():
            raise ValidationError("kernel contains non-finite samples")

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def center(self) -> tuple:
        return tuple(s // 2 for s in self.values.shape)

    def covers(self, grid: GridSpec) -> bool:
        return all(s >= 2 * c - 1 for s, c in zip(self.shape, grid.counts))

    def check_finite_bigfloat(self):
        if self.values.dtype == object:
            flat = self.values.reshape(-1)
            if not all(gmpy2.is_finite(v) for v in flat):
                raise ValidationError("kernel contains non-finite samples")


# ---------------------------------------------------------------------------
# Bigfloat FFT plans: bit-reversal permutation + per-stage twiddle tables.

_PLAN_CACHE: dict = {}
_PLAN_LOCK = threading.Lock()


class _AxisPlan:
    def __init__(self, n: int, bits: int):
        if n & (n - 1) or n < 1:
            raise ValidationError(f"bigfloat FFT needs power-of-two sizes, got {n}")
        self.n = n
        self.bits = bits
        levels = n.bit_length() - 1
        rev = np.zeros(n, dtype=np.intp)
        for i in range(n):
            rev[i] = int(format(i, f"0{levels}b")[::-1], 2) if levels else 0
        self.bitrev = rev
        with bigfloat_context(bits):
            two_pi = 2 * gmpy2.const_pi()
            roots = np.empty(max(n // 2, 1), dtype=object)
            for j in range(max(n // 2, 1)):
                ang = two_pi * j / n
                roots[j] = mpc(gmpy2.cos(ang), -gmpy2.sin(ang))
            self.fwd_stage_tw = []
            self.inv_stage_tw = []
            m = 2
            while m <= n:
                stride = n // m
                tw = roots[0 : n // 2 : stride][: m // 2].copy()
                self.fwd_stage_tw.append(tw)
                self.inv_stage_tw.append(
                    np.array([t.conjugate() for t in tw], dtype=object)
                )
                m *= 2
            self.inv_scale = mpfr(1) / n


def _axis_plan(n: int, bits: int) -> _AxisPlan:
    key = (n, bits)
    with _PLAN_LOCK:
        plan = _PLAN_CACHE.get(key)
        if plan is None:
            plan = _AxisPlan(n, bits)
            _PLAN_CACHE[key] = plan
    return plan


def _fft_last_axis(a: np.ndarray, plan: _AxisPlan, inverse: bool) -> np.ndarray:
    """Transform the last axis of a contiguous object array, batched."""
    n = plan.n
    flat = a.reshape(-1, n)
    flat = flat[:, plan.bitrev]
    stages = plan.inv_stage_tw if inverse else plan.fwd_stage_tw
    m = 2
    for s, tw in enumerate(stages):
        half = m // 2
        v = flat.reshape(flat.shape[0], n // m, m)
        even = v[:, :, :half]
        odd = v[:, :, half:]
        t = odd.copy() if s == 0 else odd * tw
        v[:, :, half:] = even - t
        v[:, :, :half] = even + t
        m *= 2
    if inverse:
        flat = flat * plan.inv_scale
    return flat.reshape(a.shape)


def _bigfloat_fft_nd(a: np.ndarray, bits: int, inverse: bool) -> np.ndarray:
    with bigfloat_context(bits):
        for axis in range(a.ndim):
            moved = np.ascontiguousarray(np.moveaxis(a, axis, -1))
            plan = _axis_plan(moved.shape[-1], bits)
            moved = _fft_last_axis(moved, plan, inverse)
            a = np.moveaxis(moved, -1, axis)
        return np.ascontiguousarray(a)


_TO_MPC = np.frompyfunc(lambda re, im: mpc(re, im), 2, 1)
_CONJ = np.frompyfunc(lambda z: z.conjugate(), 1, 1)
_REAL = np.frompyfunc(lambda z: z.real, 1, 1)
_IMAG = np.frompyfunc(lambda z: z.imag, 1, 1)


def _reflect_indices(arr: np.ndarray) -> np.ndarray:
    """arr evaluated at negated frequency indices: k -> (-k) mod n per axis."""
    out = arr
    for axis in range(arr.ndim):
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return out


# ---------------------------------------------------------------------------
# Public transforms.


def fft_forward(array: np.ndarray, cfg: PrecisionConfig) -> np.ndarray:
    """Unnormalized forward DFT over every axis of the array."""
    _check_sizes(array.shape)
    if cfg.mode == BIGFLOAT:
        return _bigfloat_fft_nd(_as_mpc(array, cfg.bits), cfg.bits, inverse=False)
    return _sfft.fftn(np.asarray(array, dtype=np.complex128))


def fft_inverse(array: np.ndarray, cfg: PrecisionConfig) -> np.ndarray:
    """Inverse DFT (normalized by 1/N) over every axis."""
    _check_sizes(array.shape)
    if cfg.mode == BIGFLOAT:
        return _bigfloat_fft_nd(_as_mpc(array, cfg.bits), cfg.bits, inverse=True)
    return _sfft.ifftn(np.asarray(array, dtype=np.complex128))


def _check_sizes(shape):
    if any(s < 1 for s in shape):
        raise ValidationError(f"zero-length FFT axis in shape {shape}")
    if int(np.prod(shape)) > 2**31:
        raise ValidationError(f"FFT size overflow for shape {shape}")


def _as_mpc(array: np.ndarray, bits: int) -> np.ndarray:
    arr = np.asarray(array)
    if arr.dtype == object:
        if arr.size and isinstance(arr.reshape(-1)[0], mpc):
            return arr.copy()
        with bigfloat_context(bits):
            zero = mpfr(0)
            return _TO_MPC(arr, zero)
    with bigfloat_context(bits):
        if np.iscomplexobj(arr):
            return _TO_MPC(arr.real, arr.imag)
        return _TO_MPC(arr, 0.0)


# ---------------------------------------------------------------------------
# Convolution.


def _padded_shape(grid: GridSpec, kshape, cfg: PrecisionConfig) -> tuple:
    need = [c + k - 1 for c, k in zip(grid.counts, kshape)]
    if cfg.mode == BIGFLOAT:
        return tuple(1 << (n - 1).bit_length() for n in need)
    return tuple(_sfft.next_fast_len(n) for n in need)


class FftConvolver:
    """Reusable plan for convolving kernels against impulse fields on a grid.

    Kernel and impulse transforms can be computed once and recombined, which
    the experiment drivers use to share the kernel FFT across trials. All
    methods are pure with respect to their inputs.
    """

    def __init__(self, grid: GridSpec, kernel_shape, cfg: PrecisionConfig):
        self.grid = grid
        self.cfg = cfg
        self.kshape = tuple(kernel_shape)
        if any(s < 2 * c - 1 for s, c in zip(self.kshape, grid.counts)):
            raise ValidationError("kernel extent must cover the grid extent")
        self.pshape = _padded_shape(grid, self.kshape, cfg)
        # Node i of the full linear convolution sits at kernel_center + i.
        center = tuple(s // 2 for s in self.kshape)
        self.out_slice = tuple(
            slice(c, c + n) for c, n in zip(center, grid.counts)
        )

    # -- single transforms ---------------------------------------------------

    def _pad(self, values: np.ndarray, shape) -> np.ndarray:
        if self.cfg.mode == BIGFLOAT:
            with bigfloat_context(self.cfg.bits):
                out = np.full(self.pshape, mpfr(0), dtype=object)
        else:
            out = np.zeros(self.pshape, dtype=np.float64)
        out[tuple(slice(0, s) for s in shape)] = values
        return out

    def kernel_hat(self, kernel: KernelField) -> np.ndarray:
        self._check_kernel(kernel)
        return fft_forward(self._pad(kernel.values, kernel.shape), self.cfg)

    def impulse_hat(self, impulses: ScalarField) -> np.ndarray:
        return fft_forward(
            self._pad(impulses.as_grid(), self.grid.counts), self.cfg
        )

    def _check_kernel(self, kernel: KernelField):
        if not np.isclose(kernel.spacing, self.grid.spacing, rtol=1e-12, atol=0):
            raise ValidationError(
                f"kernel spacing {kernel.spacing} != grid spacing {self.grid.spacing}"
            )
        if kernel.shape != self.kshape:
            raise ValidationError("kernel shape does not match convolver plan")
        kernel.check_finite_bigfloat()

    # -- packed real transforms ----------------------------------------------

    def forward_pair(self, a: np.ndarray, ashape, b: np.ndarray, bshape):
        """FFTs of two real arrays from one complex transform."""
        if self.cfg.mode != BIGFLOAT:
            za = np.zeros(self.pshape, dtype=np.complex128)
            za[tuple(slice(0, s) for s in ashape)] = np.asarray(a, dtype=np.float64)
            zb = np.zeros(self.pshape, dtype=np.float64)
            zb[tuple(slice(0, s) for s in bshape)] = b
            za += 1j * zb
            z = _sfft.fftn(za)
            zr = _reflect_indices(np.conj(z))
            return 0.5 * (z + zr), -0.5j * (z - zr)
        with bigfloat_context(self.cfg.bits):
            ap = np.full(self.pshape, mpfr(0), dtype=object)
            ap[tuple(slice(0, s) for s in ashape)] = a
            bp = np.full(self.pshape, mpfr(0), dtype=object)
            bp[tuple(slice(0, s) for s in bshape)] = b
            buf = _TO_MPC(ap, bp)
            z = _bigfloat_fft_nd(buf, self.cfg.bits, inverse=False)
            zr = _reflect_indices(_CONJ(z))
            half = mpfr(1) / 2
            a_hat = (z + zr) * half
            b_hat = (zr - z) * mpc(0, half)
            return a_hat, b_hat

    def inverse_to_grid(self, hat: np.ndarray) -> np.ndarray:
        """Inverse transform restricted to the grid window, real part."""
        full = fft_inverse(hat, self.cfg)
        window = full[self.out_slice]
        if self.cfg.mode == BIGFLOAT:
            with bigfloat_context(self.cfg.bits):
                return _REAL(window)
        return np.ascontiguousarray(window.real)

    def inverse_pair_to_grid(self, hat_a: np.ndarray, hat_b: np.ndarray):
        """Two inverse transforms of real-sequence spectra in one pass."""
        if self.cfg.mode == BIGFLOAT:
            with bigfloat_context(self.cfg.bits):
                packed = hat_a + hat_b * mpc(0, 1)
                full = fft_inverse(packed, self.cfg)
                window = full[self.out_slice]
                return _REAL(window), _IMAG(window)
        full = fft_inverse(hat_a + 1j * hat_b, self.cfg)
        window = full[self.out_slice]
        return np.ascontiguousarray(window.real), np.ascontiguousarray(window.imag)

    def product(self, a_hat: np.ndarray, b_hat: np.ndarray) -> np.ndarray:
        if self.cfg.mode == BIGFLOAT:
            with bigfloat_context(self.cfg.bits):
                return a_hat * b_hat
        return a_hat * b_hat

    # -- one-shot convolutions -------------------------------------------------

    def convolve(self, kernel: KernelField, impulses: ScalarField) -> np.ndarray:
        """Linear convolution of kernel with the impulse field, on the grid."""
        self._check_kernel(kernel)
        k_hat, g_hat = self.forward_pair(
            kernel.values, kernel.shape, impulses.as_grid(), self.grid.counts
        )
        return self.inverse_to_grid(self.product(k_hat, g_hat))

    def convolve_many(self, kernels, impulses: ScalarField):
        """Convolve several kernels against one impulse field.

        Shares the impulse transform and packs kernel transforms and inverse
        transforms pairwise, so n kernels cost about (n+3)/2 + ceil(n/2)
        transforms instead of 2n + 1.
        """
        kernels = list(kernels)
        if not kernels:
            return []
        for k in kernels:
            self._check_kernel(k)
        hats = []
        i = 0
        g_hat = None
        if len(kernels) % 2 == 1:
            k_hat, g_hat = self.forward_pair(
                kernels[0].values,
                kernels[0].shape,
                impulses.as_grid(),
                self.grid.counts,
            )
            hats.append(k_hat)
            i = 1
        for j in range(i, len(kernels), 2):
            ha, hb = self.forward_pair(
                kernels[j].values,
                kernels[j].shape,
                kernels[j + 1].values,
                kernels[j + 1].shape,
            )
            hats.extend([ha, hb])
        if g_hat is None:
            g_hat = self.impulse_hat(impulses)
        prods = [self.product(h, g_hat) for h in hats]
        outs = []
        for j in range(0, len(prods) - 1, 2):
            ra, rb = self.inverse_pair_to_grid(prods[j], prods[j + 1])
            outs.extend([ra, rb])
        if len(prods) % 2 == 1:
            outs.append(self.inverse_to_grid(prods[-1]))
        return outs


def fft_convolve(
    kernel: KernelField, impulses: ScalarField, cfg: PrecisionConfig
) -> ScalarField:
    """output(X) = sum over nodes of kernel(X - node) * impulses(node)."""
    conv = FftConvolver(impulses.grid, kernel.shape, cfg)
    values = conv.convolve(kernel, impulses)
    return ScalarField(impulses.grid, values.reshape(-1))


def assert_positive(values: np.ndarray, what: str):
    """Reject non-positive convolution output that signals underflow."""
    if values.dtype == object:
        bad = any(v <= 0 for v in values.reshape(-1))
    else:
        bad = bool((values <= 0).any())
    if bad:
        raise PrecisionError(
            f"{what} has non-positive entries after convolution; increase the "
            "precision bits (e.g. --precision big:512) or raise tau"
        )
