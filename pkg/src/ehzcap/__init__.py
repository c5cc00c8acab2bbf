"""EHZ capacities of convex polytopes and Lagrangian products."""
from .capacity import (
    Candidate,
    CapacityResult,
    SearchOptions,
    ehz_capacity,
    fixed_support_max,
    quadratic_value,
    upper_bound_from_candidate,
)
from .polytope import HPolytope, VPolytope, from_halfspaces, from_vertices, regular_polygon, volume
from .products import jk_product, kk_product, lagrangian_product
from .symplectic import block_to_interleaved, product_space, standard_space

__version__ = "0.1.0"

__all__ = [
    "Candidate",
    "CapacityResult",
    "HPolytope",
    "SearchOptions",
    "VPolytope",
    "block_to_interleaved",
    "ehz_capacity",
    "fixed_support_max",
    "from_halfspaces",
    "from_vertices",
    "jk_product",
    "kk_product",
    "lagrangian_product",
    "product_space",
    "quadratic_value",
    "regular_polygon",
    "standard_space",
    "upper_bound_from_candidate",
    "volume",
]
