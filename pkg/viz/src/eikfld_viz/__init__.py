"""Figure rendering for eikfld field files."""

from .fields import Field, load_field
from .plots import plot_contours, plot_histogram, plot_isosurface, plot_quiver

__all__ = [
    "Field",
    "load_field",
    "plot_contours",
    "plot_histogram",
    "plot_isosurface",
    "plot_quiver",
]
