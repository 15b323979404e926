"""Arithmetic backend selection: native float64 or p-bit big floats.

The big-float backend is backed by gmpy2 (GMP/MPFR/MPC). All big-float
work must run inside ``bigfloat_context(bits)`` so every operation rounds
at the configured mantissa width; gmpy2 contexts are thread-local, which
keeps concurrent convolutions independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2

from .errors import ValidationError

NATIVE64 = "native64"
BIGFLOAT = "bigfloat"

# exp(-x) underflows IEEE double near x = 745; keep a safety margin.
_NATIVE_EXP_LIMIT = 700.0


@dataclass(frozen=True)
class PrecisionConfig:
    """Arithmetic mode plus the smoothing width tau (world units)."""

    tau: float
    mode: str = NATIVE64
    bits: int = 0

    def __post_init__(self):
        if not (self.tau > 0):
            raise ValidationError(f"tau must be > 0, got {self.tau}")
        if self.mode not in (NATIVE64, BIGFLOAT):
            raise ValidationError(f"unknown precision mode {self.mode!r}")
        if self.mode == BIGFLOAT and self.bits < 64:
            raise ValidationError(
                f"bigfloat mode needs >= 64 mantissa bits, got {self.bits}"
            )

    @classmethod
    def native64(cls, tau: float) -> "PrecisionConfig":
        return cls(tau=tau, mode=NATIVE64)

    @classmethod
    def bigfloat(cls, tau: float, bits: int = 512) -> "PrecisionConfig":
        return cls(tau=tau, mode=BIGFLOAT, bits=bits)

    @property
    def is_bigfloat(self) -> bool:
        return self.mode == BIGFLOAT

    def describe(self) -> str:
        if self.is_bigfloat:
            return f"big:{self.bits}"
        return "f64"

    @classmethod
    def parse(cls, spec: str, tau: float) -> "PrecisionConfig":
        """Parse the CLI form ``f64`` or ``big:<bits>``."""
        if spec == "f64":
            return cls.native64(tau)
        if spec.startswith("big:"):
            try:
                bits = int(spec[4:])
            except ValueError:
                raise ValidationError(f"bad precision spec {spec!r}") from None
            return cls.bigfloat(tau, bits)
        raise ValidationError(f"bad precision spec {spec!r} (want f64 or big:<bits>)")


def bigfloat_context(bits: int):
    """Context manager running gmpy2 ops at the given mantissa width."""
    return gmpy2.context(precision=bits)


def native_tau_floor(diagonal: float) -> float:
    """Smallest tau safe for the native64 FFT path on a grid of this diagonal.

    Below this, exp(-diagonal/tau) underflows double precision and the
    convolution output at far nodes is dominated by FFT round-off.
    """
    return diagonal / _NATIVE_EXP_LIMIT


def checked_tau(cfg: PrecisionConfig, diagonal: float) -> bool:
    """True when the config can evaluate the kernel across the whole grid."""
    if cfg.is_bigfloat:
        return True
    return cfg.tau >= native_tau_floor(diagonal)


def roundtrip_epsilon(cfg: PrecisionConfig) -> float:
    """Relative FFT round-trip tolerance promised by the backend."""
    if cfg.is_bigfloat:
        return 2.0 ** (-cfg.bits + 8)
    return 1e-12


def log_bound(tau: float, k) -> float:
    """Worst-case softmin shift for k sources: tau * log(k)."""
    if k < 1:
        raise ValidationError(f"point-set cardinality must be >= 1, got {k}")
    return tau * math.log(k)
