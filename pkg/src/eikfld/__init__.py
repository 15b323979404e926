"""FFT-convolution signed distance fields on regular 2D/3D grids."""

from .errors import PrecisionError, ValidationError
from .grid import (
    Curve2D,
    GridSpec,
    PointSet,
    ScalarField,
    Surface3D,
    VectorField,
    snap_points,
    triangulate_and_orient,
)
from .precision import PrecisionConfig

__all__ = [
    "Curve2D",
    "GridSpec",
    "PointSet",
    "PrecisionConfig",
    "PrecisionError",
    "ScalarField",
    "Surface3D",
    "ValidationError",
    "VectorField",
    "snap_points",
    "triangulate_and_orient",
]

__version__ = "0.1.0"
