"""Numerical toolkit for sampling band-limited functions on surfaces."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    DimensionError,
    beurling_lower_constant,
    build_sphere_quadrature,
    make_rng,
    sphere_area,
    theorem_constant,
    unit_ball_volume,
)
from .convex import Ball, Box, Ellipsoid, Inflated, SymmetricPolytope, mean_width  # noqa: E402
from .surfaces import (  # noqa: E402
    HyperplaneFamily,
    SphereShell,
    UnionOfSurfaces,
    WeightedPointMeasure,
    regularity_profile,
    surface_density,
)
from .bandlimited import BandlimitedFunction, certify_sup_norm, synthesize  # noqa: E402
from .certify import Budgets, certify  # noqa: E402

__all__ = [
    "__version__", "DimensionError", "beurling_lower_constant", "build_sphere_quadrature",
    "make_rng", "sphere_area", "theorem_constant", "unit_ball_volume", "Ball", "Box",
    "Ellipsoid", "Inflated", "SymmetricPolytope", "mean_width", "HyperplaneFamily",
    "SphereShell", "UnionOfSurfaces", "WeightedPointMeasure", "regularity_profile",
    "surface_density", "BandlimitedFunction", "certify_sup_norm", "synthesize", "Budgets",
    "certify",
]
