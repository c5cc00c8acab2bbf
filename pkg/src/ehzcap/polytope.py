"""Convex polytopes in H- and V-representation.

All combinatorics is brute force over d-subsets, which is the right tool for
the sizes handled here (a handful of dimensions, a few dozen facets).
"""
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import factorial

import numpy as np
from scipy.optimize import linprog

from .config import DEFAULT_TOLERANCES
from .errors import (
    DegenerateError,
    EmptyInteriorError,
    SingularMatrixError,
    UnboundedError,
)

_UNIT_TOL = 1e-12


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _affine_rank(points, tol):
    points = np.asarray(points, dtype=float)
    if len(points) <= 1:
        return 0
    diffs = points[1:] - points[0]
    s = np.linalg.svd(diffs, compute_uv=False)
    scale = max(1.0, float(np.max(np.abs(points))))
    return int(np.sum(s > tol * scale))


def _dedupe_points(points, tol):
    if len(points) == 0:
        return np.zeros((0, points.shape[1] if points.ndim == 2 else 0))
    order = np.lexsort(points.T[::-1])
    kept = []
    for p in points[order]:
        if not any(np.max(np.abs(p - q)) <= tol for q in kept):
            kept.append(p)
    return np.array(kept)


@dataclass(frozen=True, eq=False)
class HPolytope:
    """Polytope ``{x : <n_i, x> <= h_i}`` with unit outer normals ``n_i``.

    Use :func:`from_halfspaces` or :func:`from_vertices` to build one from raw
    data; the constructor only checks shapes and normalization.
    """

    normals: np.ndarray
    heights: np.ndarray

    def __post_init__(self):
        normals = _readonly(self.normals)
        heights = _readonly(self.heights).reshape(-1)
        if normals.ndim != 2 or normals.shape[0] != heights.shape[0]:
            raise ValueError("normals must be (N, d) and heights (N,)")
        if not np.all(np.isfinite(normals)) or not np.all(np.isfinite(heights)):
            raise ValueError("non-finite polytope data")
        norms = np.linalg.norm(normals, axis=1)
        if np.any(np.abs(norms - 1.0) > _UNIT_TOL):
            raise ValueError("facet normals must have unit length")
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "heights", heights)

    @property
    def dim(self):
        return self.normals.shape[1]

    @property
    def n_facets(self):
        return self.normals.shape[0]

    def facets(self):
        return [(n.copy(), float(h)) for n, h in zip(self.normals, self.heights)]

    @cached_property
    def vertices(self):
        return _enumerate_vertices(self.normals, self.heights, DEFAULT_TOLERANCES.vertex)

    @cached_property
    def key(self):
        """Bytes identifying the exact facet data, usable as a cache key."""
        return self.normals.tobytes() + b"|" + self.heights.tobytes()

    def contains(self, x, tol=DEFAULT_TOLERANCES.vertex):
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.normals @ x <= self.heights + tol))

    def same_set(self, other, tol=1e-9):
        """Facet-set equality up to ordering."""
        if self.dim != other.dim or self.n_facets != other.n_facets:
            return False
        rows = np.hstack([self.normals, self.heights[:, None]])
        other_rows = np.hstack([other.normals, other.heights[:, None]])
        return all(np.min(np.max(np.abs(other_rows - r), axis=1)) <= tol for r in rows)

    def __repr__(self):
        return f"HPolytope(dim={self.dim}, n_facets={self.n_facets})"


@dataclass(frozen=True, eq=False)
class VPolytope:
    dim: int
    vertices: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _readonly(self.vertices)
        if v.ndim != 2 or v.shape[1] != self.dim:
            raise ValueError(f"vertices must have shape (m, {self.dim})")
        object.__setattr__(self, "vertices", v)


def _enumerate_vertices(normals, heights, tol):
    n_facets, d = normals.shape
    subsets = np.array(list(combinations(range(n_facets), d)), dtype=int)
    if len(subsets) == 0:
        return np.zeros((0, d))
    mats = normals[subsets]
    rhs = heights[subsets]
    s = np.linalg.svd(mats, compute_uv=False)
    ok = s[:, -1] > 1e-10 * np.maximum(s[:, 0], 1.0)
    if not np.any(ok):
        return np.zeros((0, d))
    pts = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    scale = max(1.0, float(np.max(np.abs(heights))))
    feasible = np.all(pts @ normals.T <= heights + tol * scale, axis=1)
    return _dedupe_points(pts[feasible], tol * scale)


def _positively_spanning(normals):
    n_facets, d = normals.shape
    if np.linalg.matrix_rank(normals) < d:
        return False
    # a strictly positive dependency sum(lam_i n_i) = 0 with lam_i >= 1
    res = linprog(
        np.ones(n_facets),
        A_eq=normals.T,
        b_eq=np.zeros(d),
        bounds=[(1.0, None)] * n_facets,
        method="highs",
    )
    return res.status == 0


def chebyshev_center(normals, heights):
    """Center and radius of the largest inscribed ball (unit normals assumed)."""
    n_facets, d = normals.shape
    scale = max(1.0, float(np.max(np.abs(heights))))
    c = np.zeros(d + 1)
    c[-1] = -1.0
    a_ub = np.hstack([normals, np.ones((n_facets, 1))])
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=heights,
        bounds=[(None, None)] * d + [(None, 10.0 * scale)],
        method="highs",
    )
    if res.status != 0:
        return None, -np.inf
    return res.x[:d], float(res.x[-1])


def from_halfspaces(dim, halfspaces, tol=DEFAULT_TOLERANCES):
    """Validate raw ``(normal, height)`` pairs into an irredundant :class:`HPolytope`.

    Normals are scaled to unit length (heights scaled alike), duplicate
    directions keep the tightest height, and half-spaces whose hyperplane
    does not carry a (dim-1)-face are dropped. Surviving facets keep their
    input order.
    """
    if not halfspaces:
        raise DegenerateError("no half-spaces given")
    normals = np.array([np.asarray(n, dtype=float).reshape(-1) for n, _ in halfspaces])
    heights = np.array([float(h) for _, h in halfspaces])
    if normals.shape[1] != dim:
        raise ValueError(f"normals must have length {dim}")
    norms = np.linalg.norm(normals, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        raise ValueError("half-space normals must be finite and nonzero")
    normals = normals / norms[:, None]
    heights = heights / norms

    keep_n, keep_h = [], []
    for n, h in zip(normals, heights):
        for k, m in enumerate(keep_n):
            if np.linalg.norm(n - m) <= tol.normal_merge:
                keep_h[k] = min(keep_h[k], h)
                break
        else:
            keep_n.append(n)
            keep_h.append(h)
    normals = np.array(keep_n)
    heights = np.array(keep_h)

    if not _positively_spanning(normals):
        raise UnboundedError("half-space normals do not positively span R^%d" % dim)
    _, radius = chebyshev_center(normals, heights)
    scale = max(1.0, float(np.max(np.abs(heights))))
    if not radius > tol.interior * scale:
        raise EmptyInteriorError("polytope has empty interior")

    verts = _enumerate_vertices(normals, heights, tol.vertex)
    vscale = max(1.0, float(np.max(np.abs(heights))))
    survivors = []
    for i, (n, h) in enumerate(zip(normals, heights)):
        on = verts[np.abs(verts @ n - h) <= tol.vertex * vscale]
        if len(on) >= dim and _affine_rank(on, tol.vertex) == dim - 1:
            survivors.append(i)
    if len(survivors) < dim + 1:
        raise DegenerateError(f"only {len(survivors)} facets survive in dimension {dim}")
    poly = HPolytope(normals[survivors] + 0.0, heights[survivors] + 0.0)
    poly.__dict__["vertices"] = verts
    return poly


def from_vertices(points, tol=DEFAULT_TOLERANCES):
    """H-representation of the convex hull of ``points`` (a :class:`VPolytope` or array)."""
    if isinstance(points, VPolytope):
        points = points.vertices
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise DegenerateError("need a nonempty (m, d) array of points")
    d = pts.shape[1]
    if len(pts) < d + 1 or _affine_rank(pts, tol.vertex) < d:
        raise DegenerateError("points do not span R^%d affinely" % d)
    pts = _dedupe_points(pts, tol.vertex)
    scale = max(1.0, float(np.max(np.abs(pts))))
    side_tol = tol.vertex * scale

    planes = []
    for subset in combinations(range(len(pts)), d):
        sub = pts[list(subset)]
        diffs = sub[1:] - sub[0]
        if d > 1:
            _, s, vt = np.linalg.svd(diffs)
            if np.sum(s > tol.vertex * scale) < d - 1:
                continue
            normal = vt[-1]
        else:
            normal = np.ones(1)
        h = float(normal @ sub[0])
        vals = pts @ normal - h
        if np.all(vals <= side_tol):
            pass
        elif np.all(vals >= -side_tol):
            normal, h = -normal, -h
        else:
            continue
        if not any(np.linalg.norm(normal - m) <= 1e-8 and abs(h - g) <= side_tol for m, g in planes):
            planes.append((normal, h))
    return from_halfspaces(d, planes, tol)


def vertices(poly):
    return poly.vertices.copy()


def support_height(poly, direction):
    """``max_{x in K} <x, u>`` for the normalized direction ``u``."""
    u = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(u)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    return float(np.max(poly.vertices @ (u / norm)))


def translate(poly, t):
    t = np.asarray(t, dtype=float)
    if t.shape != (poly.dim,):
        raise ValueError(f"translation must have length {poly.dim}")
    out = HPolytope(poly.normals, poly.heights + poly.normals @ t)
    out.__dict__["vertices"] = poly.vertices + t
    return out


def apply_linear(poly, a, tol=DEFAULT_TOLERANCES):
    """Image ``{A x : x in K}`` of the polytope under an invertible matrix."""
    a = np.asarray(a, dtype=float)
    if a.shape != (poly.dim, poly.dim):
        raise ValueError(f"matrix must be {poly.dim} x {poly.dim}")
    if abs(np.linalg.det(a)) <= 1e-12:
        raise SingularMatrixError("linear map is singular")
    raw = np.linalg.solve(a.T, poly.normals.T).T  # rows are A^{-T} n_i
    return from_halfspaces(poly.dim, list(zip(raw, poly.heights)), tol)


def scale(poly, factor):
    return apply_linear(poly, factor * np.eye(poly.dim))


class _FaceLattice:
    """Fan triangulation of faces using vertex-facet incidences."""

    def __init__(self, poly, tol):
        self.verts = poly.vertices
        scale = max(1.0, float(np.max(np.abs(poly.heights))))
        resid = np.abs(self.verts @ poly.normals.T - poly.heights)
        self.incidence = resid <= tol * scale
        self.tol = tol
        self._memo = {}

    def facet_vertices(self, i):
        return frozenset(np.flatnonzero(self.incidence[:, i]).tolist())

    def triangulate(self, face, k):
        """Simplices (tuples of k+1 vertex ids) covering a k-dimensional face."""
        key = (face, k)
        if key in self._memo:
            return self._memo[key]
        ids = sorted(face)
        if k == 0:
            out = [(ids[0],)]
        elif len(ids) == k + 1:
            out = [tuple(ids)]
        else:
            apex = ids[0]
            subfaces = set()
            for j in range(self.incidence.shape[1]):
                sub = face & self.facet_vertices(j)
                if apex in sub or len(sub) < k or sub == face:
                    continue
                if _affine_rank(self.verts[sorted(sub)], self.tol) == k - 1:
                    subfaces.add(frozenset(sub))
            out = []
            for sub in sorted(subfaces, key=sorted):
                out.extend((apex,) + s for s in self.triangulate(sub, k - 1))
        self._memo[key] = out
        return out


def _shoelace(points):
    c = points.mean(axis=0)
    ang = np.arctan2(points[:, 1] - c[1], points[:, 0] - c[0])
    p = points[np.argsort(ang)]
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def simplices(poly, tol=DEFAULT_TOLERANCES.vertex):
    """Cone decomposition from the vertex centroid: list of (d+1, d) simplices."""
    lattice = _FaceLattice(poly, tol)
    center = poly.vertices.mean(axis=0)
    out = []
    for i in range(poly.n_facets):
        for s in lattice.triangulate(lattice.facet_vertices(i), poly.dim - 1):
            out.append(np.vstack([center, poly.vertices[list(s)]]))
    return out


def volume(poly):
    d = poly.dim
    v = poly.vertices
    if d == 1:
        return float(v.max() - v.min())
    if d == 2:
        return _shoelace(v)
    total = 0.0
    for simplex in simplices(poly):
        total += abs(np.linalg.det(simplex[1:] - simplex[0]))
    return total / factorial(d)


def min_sum_squared_distances(poly, tol=1e-9, max_iter=500):
    """Minimize ``sum_i (h_i - <n_i, x>)^2`` over ``x`` in the polytope.

    Returns ``(x, value)``. Primal active-set method on the constraints
    ``<n_i, x> <= h_i``; the Hessian ``2 N^T N`` is positive definite since
    the normals span.
    """
    a, h = poly.normals, poly.heights
    gram = a.T @ a
    x = np.linalg.solve(gram, a.T @ h)
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.all(a @ x <= h + tol * scale):
        r = h - a @ x
        return x, float(r @ r)

    x = poly.vertices.mean(axis=0)
    slack = h - a @ x
    # start from the vertex centroid; nothing is active there unless the polytope is tiny
    working = [i for i in np.flatnonzero(slack <= tol * scale)]
    for _ in range(max_iter):
        grad = 2.0 * (gram @ x - a.T @ h)
        # equality-constrained step: min 1/2 p^T G p + grad^T p  s.t. a_W p = 0
        g2 = 2.0 * gram
        aw = a[working]
        m = len(working)
        kkt = np.block([[g2, aw.T], [aw, np.zeros((m, m))]])
        rhs = np.concatenate([-grad, np.zeros(m)])
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        p = sol[: poly.dim]
        if np.linalg.norm(p) <= tol * scale:
            # multipliers of grad + aw^T lam = 0
            lam = np.linalg.lstsq(aw.T, -grad, rcond=None)[0] if m else np.zeros(0)
            if m == 0 or np.min(lam) >= -1e-10:
                break
            working.pop(int(np.argmin(lam)))
            continue
        step, blocking = 1.0, None
        ap = a @ p
        for i in range(len(h)):
            if i in working or ap[i] <= 1e-14:
                continue
            t = (h[i] - a[i] @ x) / ap[i]
            if t < step:
                step, blocking = max(t, 0.0), i
        x = x + step * p
        if blocking is not None:
            working.append(blocking)
    r = h - a @ x
    return x, float(r @ r)


def regular_polygon(m, r=1.0):
    """Regular m-gon with circumradius ``r`` centered at the origin, a vertex on the x-axis."""
    if int(m) != m or m < 3:
        raise ValueError(f"a polygon needs at least 3 sides, got {m}")
    if not r > 0:
        raise ValueError("circumradius must be positive")
    m = int(m)
    theta = (2 * np.arange(m) + 1) * np.pi / m
    normals = np.column_stack([np.cos(theta), np.sin(theta)])
    heights = np.full(m, r * np.cos(np.pi / m))
    return from_halfspaces(2, list(zip(normals, heights)))


def bounding_box(poly):
    lo = poly.vertices.min(axis=0)
    hi = poly.vertices.max(axis=0)
    eye = np.eye(poly.dim)
    hs = [(e, float(u)) for e, u in zip(eye, hi)] + [(-e, float(-l)) for e, l in zip(eye, lo)]
    return from_halfspaces(poly.dim, hs)


def random_polygon(rng, n_facets=(3, 6), box=2.0, min_area=0.5, max_tries=10_000):
    """Convex hull of random points in ``[-box, box]^2`` with a facet count in range.

    Thin slivers are rejected through ``min_area``.
    """
    lo, hi = n_facets
    for _ in range(max_tries):
        target = int(rng.integers(lo, hi + 1))
        pts = rng.uniform(-box, box, size=(target, 2))
        try:
            poly = from_vertices(pts)
        except DegenerateError:
            continue
        if poly.n_facets == target and volume(poly) >= min_area:
            return poly
    raise RuntimeError("could not generate a polygon with the requested facet count")
