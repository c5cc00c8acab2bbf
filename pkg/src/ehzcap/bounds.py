"""Numerical checks of the capacity inequalities for Lagrangian products.

Each check returns a :class:`BoundReport` holding both sides of an inequality
``lhs <= rhs``. Theorem checks also carry the lifted factor certificate, which
bounds the product capacity without trusting the product search.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import capacity as cap
from .config import DEFAULT_TOLERANCES
from .errors import DimensionError, EHZError
from .polytope import bounding_box, min_sum_squared_distances, scale, translate, volume
from .products import jk_product, kk_product, verified_lift

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BoundReport:
    name: str
    lhs: float
    rhs: float
    certificate: dict = None
    metadata: dict = field(default_factory=dict)
    slack_tolerance: float = DEFAULT_TOLERANCES.bound_slack

    def __post_init__(self):
        for side in ("lhs", "rhs"):
            value = float(getattr(self, side))
            if not math.isfinite(value):
                raise ValueError(f"{self.name}: {side} is not finite")
            object.__setattr__(self, side, value)

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        return self.slack >= -self.slack_tolerance

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "passed": self.passed,
            "certificate": self.certificate,
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class CheckError:
    """A check that could not be evaluated; kept in the bundle in place of its report."""

    name: str
    error_type: str
    message: str

    passed = False

    def to_dict(self):
        return {"name": self.name, "error": {"type": self.error_type, "message": self.message}}


_CACHE = {}


def capacity_of(body, options=None):
    """Memoized :func:`ehz_capacity`; bodies are keyed by their exact facet data."""
    options = options or cap.SearchOptions()
    base = getattr(body, "base", body)
    kind = getattr(body, "kind", None)
    # jobs does not change the result, so it stays out of the key
    key = (base.key, kind, options.support_cap, options.full_enumeration,
           options.tolerances, options.max_bounces)
    if key not in _CACHE:
        _CACHE[key] = cap.ehz_capacity(body, options=options)
    return _CACHE[key]


def _search_meta(result):
    return {
        "strategy": result.strategy,
        "candidates_examined": result.candidates_examined,
        "warnings": list(result.warnings),
        "certificate": result.best.to_dict(),
    }


def _lift_meta(product, factor_result, rhs, tol):
    lift = verified_lift(product, factor_result.best.order, factor_result.best.beta)
    meta = lift.to_dict()
    meta["certifies_bound"] = bool(lift.upper_bound <= rhs + tol)
    return lift, meta


def check_theorem_jk(k, options=None):
    """c(K x_L JK) <= 2 c(K)."""
    product = jk_product(k)
    lhs = capacity_of(product, options)
    base = capacity_of(k, options)
    rhs = 2.0 * base.value
    _, cert = _lift_meta(product, base, rhs, 1e-9)
    return BoundReport(
        "theorem_jk", lhs.value, rhs, cert,
        {"lhs_search": _search_meta(lhs), "rhs_search": _search_meta(base)},
    )


def check_corollary_area(k, options=None):
    """c(K x_L JK) <= 2 Vol(K) for planar K."""
    if k.dim != 2:
        raise DimensionError(f"area corollary needs a planar polytope, got dimension {k.dim}")
    lhs = capacity_of(jk_product(k), options)
    vol = volume(k)
    return BoundReport(
        "corollary_area", lhs.value, 2.0 * vol, None,
        {"lhs_search": _search_meta(lhs), "volume": vol},
    )


def check_theorem_kk(k, options=None):
    """c(K x_L K) <= 2 sum h_i^2, with heights measured from the current origin."""
    product = kk_product(k)
    lhs = capacity_of(product, options)
    rhs = 2.0 * float(np.sum(k.heights ** 2))
    base = capacity_of(k, options)
    _, cert = _lift_meta(product, base, rhs, 1e-9)
    return BoundReport(
        "theorem_kk", lhs.value, rhs, cert,
        {"lhs_search": _search_meta(lhs), "heights": k.heights.tolist()},
    )


def _interior_translations(k, count, seed=0):
    """Translations ``t = -x`` for points ``x`` inside K, so the origin of ``K + t`` is interior."""
    rng = np.random.default_rng(seed)
    verts = k.vertices
    center = verts.mean(axis=0)
    out = []
    for _ in range(count):
        w = rng.dirichlet(np.ones(len(verts)))
        x = 0.5 * center + 0.5 * (w @ verts)
        out.append(-x)
    return out


def check_corollary_distance(k, options=None, samples=8):
    """c(K x_L K) <= 2 min_x sum dist(x, F_i)^2.

    The right side must not exceed the theorem's right side for any choice of
    interior origin; ``samples`` such origins are checked.
    """
    lhs = capacity_of(kk_product(k), options)
    x, value = min_sum_squared_distances(k)
    rhs = 2.0 * value
    translated = []
    for t in _interior_translations(k, samples):
        moved = translate(k, t)
        translated.append(2.0 * float(np.sum(moved.heights ** 2)))
    if translated and rhs > min(translated) + 1e-9:
        raise AssertionError(
            f"distance bound {rhs!r} exceeds a translated height bound {min(translated)!r}"
        )
    return BoundReport(
        "corollary_distance", lhs.value, rhs, None,
        {
            "lhs_search": _search_meta(lhs),
            "minimizer": x.tolist(),
            "min_sum_squared_distances": value,
            "translated_height_bounds": translated,
        },
    )


def viterbo_ratio(body, options=None):
    """c(K) / (n! Vol(K))^(1/n) for K in R^{2n}."""
    base = getattr(body, "base", body)
    n = base.dim // 2
    c = capacity_of(body, options).value
    return c / (math.factorial(n) * volume(base)) ** (1.0 / n)


def _viterbo_report(name, body, threshold, options):
    base = getattr(body, "base", body)
    result = capacity_of(body, options)
    vol = volume(base)
    return BoundReport(
        name, viterbo_ratio(body, options), threshold, None,
        {"capacity": result.value, "volume": vol, "n": base.dim // 2, "lhs_search": _search_meta(result)},
    )


def check_viterbo(k, options=None):
    """Ratio against the conjectured threshold 1 (known to fail for some bodies)."""
    return _viterbo_report("viterbo_ratio", k, 1.0, options)


def check_viterbo_jk(k, options=None):
    """For planar K the area corollary caps the ratio of K x_L JK at sqrt(2)."""
    if k.dim != 2:
        raise DimensionError("the sqrt(2) ratio bound applies to planar factors only")
    return _viterbo_report("viterbo_ratio_jk_product", jk_product(k), SQRT2, options)


def _default_shift(dim):
    return np.array([0.5 * (-1) ** i / (i + 1) for i in range(dim)])


def check_translation(k, options=None, shift=None):
    t = _default_shift(k.dim) if shift is None else np.asarray(shift, dtype=float)
    a = capacity_of(k, options).value
    b = capacity_of(translate(k, t), options).value
    return BoundReport(
        "axiom_translation", abs(a - b), 1e-9 * max(1.0, a), None,
        {"capacity": a, "translated_capacity": b, "shift": t.tolist()},
    )


def check_conformality(k, options=None, factor=2.0):
    a = capacity_of(k, options).value
    b = capacity_of(scale(k, factor), options).value
    return BoundReport(
        "axiom_conformality", abs(b - factor ** 2 * a), 1e-9 * max(1.0, b), None,
        {"capacity": a, "scaled_capacity": b, "factor": factor},
    )


def check_monotonicity(k, options=None):
    box = bounding_box(k)
    a = capacity_of(k, options).value
    b = capacity_of(box, options).value
    return BoundReport("axiom_monotonicity", a, b, None, {"container": "bounding_box"})


def _checks_for(dim):
    checks = [("theorem_jk", check_theorem_jk)]
    if dim == 2:
        checks.append(("corollary_area", check_corollary_area))
    checks += [
        ("theorem_kk", check_theorem_kk),
        ("corollary_distance", check_corollary_distance),
        ("viterbo_ratio", check_viterbo),
    ]
    if dim == 2:
        checks.append(("viterbo_ratio_jk_product", check_viterbo_jk))
    checks += [
        ("axiom_translation", check_translation),
        ("axiom_conformality", check_conformality),
        ("axiom_monotonicity", check_monotonicity),
    ]
    return checks


def full_report(k, options=None):
    """Every applicable check, in a fixed order; failures become :class:`CheckError` entries."""
    out = []
    for name, check in _checks_for(k.dim):
        try:
            out.append(check(k, options))
        except (EHZError, ValueError, ArithmeticError, AssertionError, np.linalg.LinAlgError) as exc:
            out.append(CheckError(name, type(exc).__name__, str(exc)))
    return out
