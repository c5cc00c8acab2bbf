"""EHZ capacity of a convex polytope via the Haim-Kislev combinatorial formula.

For an ordering ``sigma`` of facets and weights ``beta`` in

    M(K) = {beta >= 0, sum beta_i h_i = 1, sum beta_i n_i = 0}

the order-dependent quadratic form is

    q(sigma, beta) = sum_{j < i} beta_{sigma(i)} beta_{sigma(j)} omega(n_{sigma(j)}, n_{sigma(i)})

and ``c_EHZ(K) = 1 / (2 max q)``. The maximum is searched over ordered supports:
for a fixed ordered support the maximizer in the open face is a stationary
point of ``q`` under the linear constraints, which is one linear solve.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from math import comb, factorial

import numpy as np

from .config import DEFAULT_MAX_ORDERED_SUPPORTS, DEFAULT_TOLERANCES, Tolerances
from .errors import (
    InfeasibleCandidateError,
    NonpositiveQError,
    NoPositiveCandidateError,
    OddDimensionError,
    SearchTooLargeError,
)
from .symplectic import standard_space

logger = logging.getLogger(__name__)

# subsets per work unit; fixed so results do not depend on the number of workers
_CHUNK_ORDERS = 4096


@dataclass(frozen=True, eq=False)
class Candidate:
    """A facet order together with weights in M(K); bounds the capacity by 1/(2q)."""

    order: tuple
    beta: np.ndarray
    q_value: float

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "order", tuple(int(i) for i in self.order))

    @property
    def support(self):
        return tuple(i for i in self.order if self.beta[i] != 0)

    def to_dict(self):
        return {"order": list(self.order), "beta": self.beta.tolist(), "q_value": self.q_value}


@dataclass(frozen=True)
class CapacityResult:
    value: float
    best: Candidate
    strategy: str
    candidates_examined: int
    warnings: tuple = ()

    def to_dict(self):
        return {
            "value": self.value,
            "strategy": self.strategy,
            "candidates_examined": self.candidates_examined,
            "certificate": self.best.to_dict(),
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class SearchOptions:
    """How :func:`ehz_capacity` enumerates ordered supports.

    ``support_cap=None`` picks the default: the exact angular strategy for
    planar polytopes and ``dim + 1`` otherwise. ``full_enumeration`` sets the
    cap to the facet count.
    """

    support_cap: int = None
    full_enumeration: bool = False
    tolerances: Tolerances = DEFAULT_TOLERANCES
    jobs: int = 1
    max_bounces: int = 3
    max_ordered_supports: int = DEFAULT_MAX_ORDERED_SUPPORTS

    def __post_init__(self):
        if self.support_cap is not None and self.support_cap < 2:
            raise ValueError("support cap must be at least 2")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")
        if self.max_bounces < 2:
            raise ValueError("max_bounces must be at least 2")


def _resolve(poly, space):
    """Unwrap product polytopes and pick the form they carry."""
    base = getattr(poly, "base", None)
    if base is not None:
        space = space or poly.space
        poly = base
    if space is None:
        if poly.dim % 2:
            raise OddDimensionError(f"polytope dimension {poly.dim} is odd")
        space = standard_space(poly.dim // 2)
    if space.dim != poly.dim:
        raise ValueError(f"space dimension {space.dim} != polytope dimension {poly.dim}")
    return poly, space


def _check_indices(order, n_facets):
    order = tuple(int(i) for i in order)
    for i in order:
        if not 0 <= i < n_facets:
            raise IndexError(f"facet index {i} out of range for {n_facets} facets")
    if len(set(order)) != len(order):
        raise ValueError("order repeats a facet index")
    return order


def quadratic_value(poly, order, beta, space=None):
    """The double sum over ``j < i`` of ``beta_{o_i} beta_{o_j} omega(n_{o_j}, n_{o_i})``."""
    poly, space = _resolve(poly, space)
    order = _check_indices(order, poly.n_facets)
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (poly.n_facets,):
        raise ValueError(f"beta must have length {poly.n_facets}")
    off = np.setdiff1d(np.arange(poly.n_facets), order)
    if np.any(beta[off] != 0):
        raise ValueError("beta is nonzero on a facet missing from the order")
    if len(order) < 2:
        return 0.0
    idx = list(order)
    g = space.gram(poly.normals[idx])
    b = beta[idx]
    return float(np.sum(np.triu(g, 1) * np.outer(b, b)))


def _constraint_residuals(poly, beta):
    return (
        float(max(0.0, -np.min(beta))),
        float(abs(beta @ poly.heights - 1.0)),
        float(np.max(np.abs(beta @ poly.normals))),
    )


def validate_candidate(poly, order, beta, space=None, tol=DEFAULT_TOLERANCES):
    """Raise :class:`InfeasibleCandidateError` unless ``beta`` lies in M(K); return q."""
    poly, space = _resolve(poly, space)
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (poly.n_facets,):
        raise ValueError(f"beta must have length {poly.n_facets}")
    neg, heights, normals = _constraint_residuals(poly, beta)
    if neg > 0:
        raise InfeasibleCandidateError("nonnegativity", neg)
    if heights > tol.feasibility:
        raise InfeasibleCandidateError("heights", heights)
    if normals > tol.feasibility:
        raise InfeasibleCandidateError("normals", normals)
    return quadratic_value(poly, order, beta, space)


def upper_bound_from_candidate(poly, order, beta, space=None, tol=DEFAULT_TOLERANCES):
    """``1 / (2 q)`` for a feasible candidate with ``q > 0``."""
    q = validate_candidate(poly, order, beta, space, tol)
    if not q > tol.positivity:
        raise NonpositiveQError(f"candidate quadratic value {q:.3e} is not positive")
    return 1.0 / (2.0 * q)


# ---------------------------------------------------------------------------
# batched stationarity solves


def _order_forms(gram, orders):
    """Symmetric W with q = 1/2 beta^T W beta for each ordered support (rows of ``orders``)."""
    g = gram[orders[:, :, None], orders[:, None, :]]
    upper = np.triu(g, 1)
    return upper + np.swapaxes(upper, 1, 2)


def _solve_stationary(w, cons, rhs, tol):
    """Least-norm solutions of the KKT systems ``[[W, C^T], [C, 0]] x = [0, rhs]``.

    Returns (beta, consistent) where inconsistent systems have no stationary
    point on the open face.
    """
    m, k, _ = w.shape
    c = cons.shape[-2]
    kkt = np.zeros((m, k + c, k + c))
    kkt[:, :k, :k] = w
    kkt[:, :k, k:] = np.swapaxes(cons, -1, -2)
    kkt[:, k:, :k] = cons
    b = np.zeros((m, k + c))
    b[:, k:] = rhs
    x = np.einsum("mij,mj->mi", np.linalg.pinv(kkt, rcond=tol.rank), b)
    resid = np.max(np.abs(np.einsum("mij,mj->mi", kkt, x) - b), axis=1)
    return x[:, :k], resid <= tol.feasibility


def _feasible(beta, cons, rhs, tol):
    pos = np.all(beta > tol.positivity, axis=-1)
    r = np.max(np.abs(np.einsum("...ij,...j->...i", cons, beta) - rhs), axis=-1)
    return pos & (r <= tol.feasibility)


def _better(a, b):
    """Deterministic total order on (q, order): larger q wins, then the smaller order."""
    if b is None:
        return True
    return a[0] > b[0] or (a[0] == b[0] and a[1] < b[1])


@lru_cache(maxsize=None)
def _orders_without_reversal(k):
    perms = np.array([p for p in permutations(range(k)) if p[0] < p[-1]], dtype=int).reshape(-1, k)
    perms.setflags(write=False)
    return perms


def _search_chunk(args):
    """Best (q, order, beta_on_order) and the count of ordered supports solved."""
    normals, heights, gram, subsets, perm_slice, tol = args
    n_facets, d = normals.shape
    k = subsets.shape[1]
    perms = _orders_without_reversal(k)[perm_slice[0] : perm_slice[1]]
    rhs = np.zeros(d + 1)
    rhs[0] = 1.0
    cons = np.concatenate([heights[subsets][:, None, :], np.swapaxes(normals[subsets], 1, 2)], axis=1)

    # when the constraints pin beta down, it is the same for every order of the subset
    pinv_c = np.linalg.pinv(cons, rcond=tol.rank)
    beta0 = pinv_c @ rhs
    s = np.linalg.svd(cons, compute_uv=False)
    full_rank = np.sum(s > tol.rank * np.maximum(s[:, :1], 1.0), axis=1) == k
    consistent = np.max(np.abs(np.einsum("mij,mj->mi", cons, beta0) - rhs), axis=1) <= tol.feasibility
    pinned = full_rank & consistent
    keep = pinned & _feasible(beta0, cons, rhs, tol)
    free = (~full_rank) & consistent

    best = None
    examined = 0
    if np.any(keep):
        sub = subsets[keep]
        betas = beta0[keep]
        orders = sub[:, perms]                        # (S, P, k)
        beta_ord = np.take_along_axis(
            np.broadcast_to(betas[:, None, :], orders.shape), perms[None].repeat(len(sub), 0), axis=2
        )
        w = _order_forms(gram, orders.reshape(-1, k)).reshape(len(sub), len(perms), k, k)
        q = 0.5 * np.einsum("spi,spij,spj->sp", beta_ord, w, beta_ord)
        examined += q.size
        best = _reduce(best, orders.reshape(-1, k), beta_ord.reshape(-1, k), q.reshape(-1))
    if np.any(free):
        sub = subsets[free]
        orders = sub[:, perms].reshape(-1, k)
        w = _order_forms(gram, orders)
        cons_o = np.concatenate(
            [heights[orders][:, None, :], np.swapaxes(normals[orders], 1, 2)], axis=1
        )
        beta, ok = _solve_stationary(w, cons_o, rhs, tol)
        ok &= _feasible(beta, cons_o, rhs, tol)
        examined += len(orders)
        if np.any(ok):
            q = 0.5 * np.einsum("mi,mij,mj->m", beta[ok], w[ok], beta[ok])
            best = _reduce(best, orders[ok], beta[ok], q)
    examined += int(np.sum(~(pinned | free)) + np.sum(pinned & ~keep)) * len(perms)
    return best, examined


def _reduce(best, orders, betas, q):
    """Fold a batch into the running best; a negative q means the reversed order wins."""
    flip = q < 0
    q = np.abs(q)
    if len(q) == 0:
        return best
    top = np.max(q)
    for idx in np.flatnonzero(q == top):
        o = orders[idx][::-1] if flip[idx] else orders[idx]
        b = betas[idx][::-1] if flip[idx] else betas[idx]
        cand = (float(q[idx]), tuple(int(i) for i in o), b.copy())
        if _better(cand, best):
            best = cand
    return best


def _evaluate_orders(args):
    """Best candidate among explicit ordered supports of equal length."""
    normals, heights, gram, orders, tol = args
    d = normals.shape[1]
    rhs = np.zeros(d + 1)
    rhs[0] = 1.0
    cons = np.concatenate([heights[orders][:, None, :], np.swapaxes(normals[orders], 1, 2)], axis=1)
    w = _order_forms(gram, orders)
    beta, ok = _solve_stationary(w, cons, rhs, tol)
    ok &= _feasible(beta, cons, rhs, tol)
    best = None
    if np.any(ok):
        q = 0.5 * np.einsum("mi,mij,mj->m", beta[ok], w[ok], beta[ok])
        best = _reduce(best, orders[ok], beta[ok], q)
    return best, len(orders)


def _cone_groups(factor, offset):
    """Single facets and pairs of adjacent facets (sharing a vertex) of a polygon."""
    ring = angular_order(factor)
    groups = [(offset + i,) for i in range(factor.n_facets)]
    m = len(ring)
    for a in range(m):
        pair = tuple(sorted((offset + ring[a], offset + ring[(a + 1) % m])))
        if pair not in groups:
            groups.append(pair)
    return groups


def _balanced(vectors, tol=1e-12):
    """True when some strictly positive combination of the planar ``vectors`` vanishes."""
    theta = np.sort(np.mod(np.arctan2(vectors[:, 1], vectors[:, 0]), 2 * np.pi))
    gaps = np.diff(np.append(theta, theta[0] + 2 * np.pi))
    widest = np.max(gaps)
    if widest < np.pi - tol:
        return True
    # all vectors on one line, pointing both ways
    return len(vectors) == 2 and abs(widest - np.pi) <= tol


def _group_sequences(groups, r, normals):
    """Ordered r-tuples of disjoint groups whose facet normals can balance to zero."""
    out = []
    balanced = {}
    for seq in permutations(range(len(groups)), r):
        used = [f for g in seq for f in groups[g]]
        if len(used) != len(set(used)):
            continue
        key = frozenset(used)
        if key not in balanced:
            balanced[key] = _balanced(normals[sorted(key)])
        if balanced[key]:
            out.append(seq)
    return out


def lagrangian_patterns(first, second, max_bounces=3):
    """Cyclic alternating facet orders for the product of two polygons.

    A-groups come from the first factor (indices ``0..N1-1``) and B-groups from
    the second (offset by ``N1``); each group is one facet or two adjacent
    facets and the order reads ``A1 B1 A2 B2 ... Ar Br`` for ``2 <= r <=
    max_bounces``. Facets of the same block commute in the quadratic form and
    cyclic rotation preserves it on M(K), so only rotations whose first A-group
    has the smallest group id are produced.
    """
    ga = _cone_groups(first, 0)
    gb = _cone_groups(second, first.n_facets)
    stacked = np.vstack([first.normals, second.normals])
    orders = {}
    for r in range(2, max_bounces + 1):
        seqs_a = [s for s in _group_sequences(ga, r, stacked) if s[0] == min(s)]
        seqs_b = _group_sequences(gb, r, stacked)
        for sa in seqs_a:
            for sb in seqs_b:
                order = []
                for i in range(r):
                    order.extend(ga[sa[i]])
                    order.extend(gb[sb[i]])
                orders.setdefault(len(order), []).append(order)
    return {k: np.array(v, dtype=int) for k, v in sorted(orders.items())}


def count_ordered_supports(n_facets, cap):
    """Ordered supports of size 2..cap, counting each order and its reversal once."""
    return sum(comb(n_facets, k) * max(1, factorial(k) // 2) for k in range(2, cap + 1))


def _work_units(n_facets, cap):
    """(subsets, permutation range) blocks of roughly ``_CHUNK_ORDERS`` ordered supports."""
    for k in range(2, cap + 1):
        subsets = np.array(list(combinations(range(n_facets), k)), dtype=int)
        n_perms = len(_orders_without_reversal(k))
        per_perm = min(n_perms, _CHUNK_ORDERS)
        per_sub = max(1, _CHUNK_ORDERS // per_perm)
        for start in range(0, len(subsets), per_sub):
            for p0 in range(0, n_perms, per_perm):
                yield subsets[start : start + per_sub], (p0, min(p0 + per_perm, n_perms))


def fixed_support_max(poly, order, space=None, tol=DEFAULT_TOLERANCES):
    """Stationary maximizer of q with beta supported exactly on ``order``, or None.

    None means there is no stationary point with strictly positive weights and
    ``q > 0`` on this open face; a maximum on its boundary belongs to a smaller
    support.
    """
    poly, space = _resolve(poly, space)
    order = _check_indices(order, poly.n_facets)
    if len(order) < 2:
        raise ValueError("an ordered support needs at least two facets")
    idx = np.array(order)[None, :]
    gram = space.gram(poly.normals)
    w = _order_forms(gram, idx)
    rhs = np.zeros(poly.dim + 1)
    rhs[0] = 1.0
    cons = np.concatenate([poly.heights[idx][:, None, :], np.swapaxes(poly.normals[idx], 1, 2)], axis=1)
    beta, ok = _solve_stationary(w, cons, rhs, tol)
    if not (ok[0] and _feasible(beta, cons, rhs, tol)[0]):
        return None
    full = np.zeros(poly.n_facets)
    full[list(order)] = beta[0]
    q = quadratic_value(poly, order, full, space)
    if not q > tol.positivity:
        return None
    return Candidate(order, full, q)


def angular_order(poly):
    """Facet indices sorted counterclockwise by normal angle, starting from the smallest angle."""
    theta = np.mod(np.arctan2(poly.normals[:, 1], poly.normals[:, 0]), 2 * np.pi)
    return tuple(int(i) for i in np.argsort(theta, kind="stable"))


def _planar_search(poly, space, tol):
    # Edge vectors beta_i n_i of a closed chain enclose the most signed area when
    # sorted by angle, and by Minkowski's mixed-area inequality the best weights
    # use every facet; one stationary solve on the full angular order suffices.
    order = angular_order(poly)
    cand = fixed_support_max(poly, order, space, tol)
    if cand is None:
        cand = fixed_support_max(poly, order[::-1], space, tol)
    return cand, 2


def _run(units, worker, jobs):
    if jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, units))
    return [worker(u) for u in units]


def _planar_factors(poly):
    factors = getattr(poly, "factors", None)
    return factors is not None and all(f.dim == 2 for f in factors)


def ehz_capacity(poly, space=None, options=None, **overrides):
    """EHZ capacity of ``poly`` with its optimal :class:`Candidate`.

    Strategy, unless forced by ``full_enumeration`` or ``support_cap``:
    planar polytopes use the angular order on the full facet set, products of
    two polygons use :func:`lagrangian_patterns`, everything else searches
    ordered supports of size at most ``dim + 1``. Keyword overrides are
    forwarded to :class:`SearchOptions`.
    """
    opts = options or SearchOptions()
    if overrides:
        opts = SearchOptions(**{**opts.__dict__, **overrides})
    product = poly if _planar_factors(poly) else None
    poly, space = _resolve(poly, space)
    tol = opts.tolerances
    n_facets, d = poly.normals.shape
    warnings = []

    cap = None
    if opts.full_enumeration:
        cap = n_facets
    elif opts.support_cap is not None:
        cap = min(opts.support_cap, n_facets)
    elif d == 2:
        cand, examined = _planar_search(poly, space, tol)
        if cand is None:
            raise NoPositiveCandidateError("no feasible ordering with positive quadratic value")
        return CapacityResult(1.0 / (2.0 * cand.q_value), cand, "planar-angular", examined)
    elif product is None:
        cap = min(d + 1, n_facets)

    gram = space.gram(poly.normals)
    if cap is not None:
        strategy = f"support-capped({cap})" if cap < n_facets else "full-permutation"
        total = count_ordered_supports(n_facets, cap)
        if total > opts.max_ordered_supports:
            raise SearchTooLargeError(
                f"{total} ordered supports exceed the budget of {opts.max_ordered_supports}"
            )
        if cap < n_facets:
            warnings.append(
                f"search capped at {cap} of {n_facets} facets; not cross-checked against full enumeration"
            )
        units = [
            (poly.normals, poly.heights, gram, s, ps, tol) for s, ps in _work_units(n_facets, cap)
        ]
        results = _run(units, _search_chunk, opts.jobs)
    else:
        strategy = f"lagrangian-pattern({opts.max_bounces})"
        warnings.append(
            f"search limited to alternating patterns with at most {opts.max_bounces} bounces"
        )
        patterns = lagrangian_patterns(*product.factors, max_bounces=opts.max_bounces)
        units = [
            (poly.normals, poly.heights, gram, orders[start : start + _CHUNK_ORDERS], tol)
            for orders in patterns.values()
            for start in range(0, len(orders), _CHUNK_ORDERS)
        ]
        results = _run(units, _evaluate_orders, opts.jobs)

    best = None
    examined = 0
    for part, count in results:
        examined += count
        if part is not None and _better(part, best):
            best = part
    if best is None or not best[0] > tol.positivity:
        raise NoPositiveCandidateError("no feasible ordering with positive quadratic value")
    q, order, beta_on_order = best
    beta = np.zeros(n_facets)
    beta[list(order)] = beta_on_order
    q_exact = quadratic_value(poly, order, beta, space)
    cand = Candidate(order, beta, q_exact)
    return CapacityResult(1.0 / (2.0 * q_exact), cand, strategy, examined, tuple(warnings))
