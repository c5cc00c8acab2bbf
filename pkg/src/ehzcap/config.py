"""Numerical tolerances used throughout the package.

Every threshold lives here so a caller can override the whole set per call
via :func:`dataclasses.replace`.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-9     # constraint residuals of a candidate
    positivity: float = 1e-10     # support coordinates and q > 0
    rank: float = 1e-10           # relative singular value cutoff in KKT solves
    normal_merge: float = 1e-10   # angular tolerance for duplicate normals
    vertex: float = 1e-9          # vertex feasibility and deduplication
    interior: float = 1e-10       # Chebyshev radius relative to polytope scale
    bound_slack: float = 1e-8     # BoundReport pass threshold on rhs - lhs

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"tolerance {name} must be positive, got {value}")


DEFAULT_TOLERANCES = Tolerances()

# Ordered supports above this count are refused instead of silently running for hours.
DEFAULT_MAX_ORDERED_SUPPORTS = 20_000_000
