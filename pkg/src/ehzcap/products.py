"""Lagrangian products ``K x_L T`` and the certificate lifts for ``K x_L JK`` and ``K x_L K``."""
from dataclasses import dataclass

import numpy as np

from .capacity import Candidate, validate_candidate
from .config import DEFAULT_TOLERANCES
from .errors import DimensionMismatchError, OddDimensionError
from .polytope import HPolytope, apply_linear
from .symplectic import product_space, standard_space

KINDS = ("jk", "kk", "general")


@dataclass(frozen=True, eq=False)
class ProductPolytope:
    """``base`` lives in R^{4n}; facets ``0..N1-1`` are ``(n_i, 0)``, the rest ``(0, m_j)``."""

    base: HPolytope
    factor_dim: int
    kind: str
    factors: tuple

    @property
    def space(self):
        return product_space(self.factor_dim // 2)

    @property
    def dim(self):
        return self.base.dim

    @property
    def n_facets(self):
        return self.base.n_facets

    @property
    def normals(self):
        return self.base.normals

    @property
    def heights(self):
        return self.base.heights

    @property
    def vertices(self):
        return self.base.vertices


def lagrangian_product(k, t, kind="general"):
    """Product with the first factor in the a-block and the second in the b-block."""
    if k.dim != t.dim:
        raise DimensionMismatchError(f"factor dimensions differ: {k.dim} vs {t.dim}")
    if k.dim % 2:
        raise OddDimensionError(f"factor dimension {k.dim} is odd")
    if kind not in KINDS:
        raise ValueError(f"unknown product kind {kind!r}")
    d = k.dim
    normals = np.vstack([
        np.hstack([k.normals, np.zeros((k.n_facets, d))]),
        np.hstack([np.zeros((t.n_facets, d)), t.normals]),
    ])
    heights = np.concatenate([k.heights, t.heights])
    base = HPolytope(normals, heights)
    # vertices of a product are pairs of factor vertices
    vk, vt = k.vertices, t.vertices
    base.__dict__["vertices"] = np.hstack([np.repeat(vk, len(vt), axis=0), np.tile(vt, (len(vk), 1))])
    return ProductPolytope(base, d, kind, (k, t))


def jk_product(k):
    """``K x_L J K``; the second block has normals ``J n_i`` and the same heights."""
    if k.dim % 2:
        raise OddDimensionError(f"factor dimension {k.dim} is odd")
    jk = apply_linear(k, standard_space(k.dim // 2).j_matrix)
    return lagrangian_product(k, jk, kind="jk")


def kk_product(k):
    return lagrangian_product(k, k, kind="kk")


def _check_factor_candidate(factor, order, beta, tol):
    if factor is not None:
        validate_candidate(factor, order, beta, tol=tol)
    order = tuple(int(i) for i in order)
    beta = np.asarray(beta, dtype=float)
    return order, beta


def lift_certificate_jk(order, beta, factor=None, tol=DEFAULT_TOLERANCES):
    """Lift a factor candidate to ``K x_L JK``.

    The lifted order walks ``sigma`` backwards, each facet ``s`` followed by
    its partner ``s + N``; weights are halved and duplicated. Cross terms pair
    as ``omega~((n_i, 0), (0, J n_j)) = -omega(n_i, n_j)``, so walking
    ``sigma`` forwards would give minus half the factor value. The lifted
    value here is plus half.
    When ``factor`` is given, the input is checked against its constraint set.
    """
    order, beta = _check_factor_candidate(factor, order, beta, tol)
    n = len(beta)
    lifted = []
    for s in reversed(order):
        lifted.extend((s, s + n))
    return tuple(lifted), np.concatenate([beta, beta]) / 2.0


def lift_certificate_kk(order, beta, factor=None, tol=DEFAULT_TOLERANCES):
    """Lift a factor candidate to ``K x_L K``: ``sigma((i+1)/2)`` for odd ``i``, ``sigma(i/2) + N`` for even ``i``."""
    order, beta = _check_factor_candidate(factor, order, beta, tol)
    n = len(beta)
    lifted = []
    for s in order:
        lifted.extend((s, s + n))
    return tuple(lifted), np.concatenate([beta, beta]) / 2.0


@dataclass(frozen=True)
class LiftReport:
    """A verified lifted certificate with the identities checked on it."""

    candidate: Candidate
    factor_q: float
    expected_q: float
    identity_error: float
    upper_bound: float
    cauchy_schwarz_floor: float = None
    cauchy_schwarz_equality: bool = None

    def to_dict(self):
        out = {
            "candidate": self.candidate.to_dict(),
            "factor_q": self.factor_q,
            "expected_q": self.expected_q,
            "identity_error": self.identity_error,
            "upper_bound": self.upper_bound,
        }
        if self.cauchy_schwarz_floor is not None:
            out["cauchy_schwarz_floor"] = self.cauchy_schwarz_floor
            out["cauchy_schwarz_equality"] = self.cauchy_schwarz_equality
        return out


def verified_lift(product, order, beta, tol=DEFAULT_TOLERANCES, identity_tol=1e-12):
    """Lift a candidate of ``product.factors[0]`` and check the identities the lift promises.

    JK lifts must reproduce half the factor value; KK lifts must give
    ``sum(beta**2) / 4``, which Cauchy-Schwarz bounds below by ``1 / (4 sum h_i^2)``.
    """
    factor = product.factors[0]
    factor_q = validate_candidate(factor, order, beta, tol=tol)
    if product.kind == "jk":
        lo, lb = lift_certificate_jk(order, beta)
        expected = 0.5 * factor_q
    elif product.kind == "kk":
        lo, lb = lift_certificate_kk(order, beta)
        expected = 0.25 * float(np.sum(np.asarray(beta) ** 2))
    else:
        raise ValueError("certificates lift only to jk and kk products")
    q = validate_candidate(product, lo, lb, tol=tol)
    err = abs(q - expected)
    if err > identity_tol * max(1.0, abs(expected)):
        raise AssertionError(f"lifted value {q!r} differs from {expected!r} by {err:.3e}")
    report = dict(
        candidate=Candidate(lo, lb, q),
        factor_q=factor_q,
        expected_q=expected,
        identity_error=err,
        upper_bound=1.0 / (2.0 * q),
    )
    if product.kind == "kk":
        h2 = float(np.sum(factor.heights ** 2))
        b2 = float(np.sum(np.asarray(beta) ** 2))
        report["cauchy_schwarz_floor"] = 0.25 / h2
        report["cauchy_schwarz_equality"] = bool(abs(b2 * h2 - 1.0) <= 1e-9)
    return LiftReport(**report)

