import math

import numpy as np
import pytest
from scipy.optimize import minimize

from ehzcap.capacity import (
    SearchOptions,
    angular_order,
    count_ordered_supports,
    ehz_capacity,
    fixed_support_max,
    quadratic_value,
    upper_bound_from_candidate,
    validate_candidate,
)
from ehzcap.errors import (
    InfeasibleCandidateError,
    NoPositiveCandidateError,
    NonpositiveQError,
    OddDimensionError,
    SearchTooLargeError,
)
from ehzcap.polytope import apply_linear, from_halfspaces, from_vertices, regular_polygon, translate, volume
from ehzcap.symplectic import standard_space

from conftest import polygon_corpus

QUARTER = np.full(4, 0.25)


def slsqp_support_max(poly, order, starts=20, seed=0):
    """Best q over beta > 0 supported on ``order`` by multi-start SLSQP; None if nothing feasible."""
    space = standard_space(poly.dim // 2)
    k = len(order)
    idx = list(order)

    def full(b):
        out = np.zeros(poly.n_facets)
        out[idx] = b
        return out

    cons = [
        {"type": "eq", "fun": lambda b: poly.heights[idx] @ b - 1.0},
        {"type": "eq", "fun": lambda b: poly.normals[idx].T @ b},
    ]
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(starts):
        x0 = rng.uniform(0.05, 1.0, k)
        res = minimize(
            lambda b: -quadratic_value(poly, order, full(b), space),
            x0,
            method="SLSQP",
            bounds=[(0, None)] * k,
            constraints=cons,
            options={"ftol": 1e-14, "maxiter": 500},
        )
        if not res.success:
            continue
        if abs(poly.heights[idx] @ res.x - 1) > 1e-7 or np.abs(poly.normals[idx].T @ res.x).max() > 1e-7:
            continue
        if best is None or -res.fun > best:
            best = -res.fun
    return best


class TestQuadraticValue:
    def test_square(self, square):
        assert quadratic_value(square, (0, 1, 2, 3), QUARTER) == pytest.approx(1 / 8, abs=1e-15)

    def test_zero_beta(self, square):
        assert quadratic_value(square, (0, 1, 2, 3), np.zeros(4)) == 0.0

    def test_reversal(self, square):
        assert quadratic_value(square, (3, 2, 1, 0), QUARTER) == pytest.approx(-1 / 8, abs=1e-15)

    def test_reversal_pairing_random(self, small_corpus):
        rng = np.random.default_rng(4)
        for poly in small_corpus:
            beta = rng.uniform(size=poly.n_facets)
            order = tuple(rng.permutation(poly.n_facets))
            q = quadratic_value(poly, order, beta)
            assert abs(q + quadratic_value(poly, order[::-1], beta)) <= 1e-12

    def test_only_nonzero_beta_order_matters(self, square):
        beta = np.array([0.5, 0.0, 0.5, 0.0])
        assert quadratic_value(square, (0, 1, 2, 3), beta) == quadratic_value(square, (1, 0, 3, 2), beta)

    def test_index_error(self, square):
        with pytest.raises(IndexError):
            quadratic_value(square, (0, 1, 4), np.ones(4))


class TestFixedSupportMax:
    def test_square(self, square):
        cand = fixed_support_max(square, (0, 1, 2, 3))
        np.testing.assert_allclose(cand.beta, QUARTER, atol=1e-12)
        assert cand.q_value == pytest.approx(1 / 8, abs=1e-14)

    def test_opposite_pair(self, square):
        assert fixed_support_max(square, (0, 2)) is None

    def test_triangle_by_hand(self, triangle):
        # normals -e1, -e2, (e1+e2)/sqrt2 with heights 0, 0, 1/sqrt2
        cand = next(c for c in (fixed_support_max(triangle, o) for o in [(0, 1, 2), (2, 1, 0)]) if c)
        assert cand.q_value == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(np.sort(cand.beta), [1, 1, math.sqrt(2)], atol=1e-12)

    def test_against_slsqp(self, small_corpus):
        rng = np.random.default_rng(9)
        checked = 0
        for poly in small_corpus:
            for _ in range(4):
                k = int(rng.integers(3, poly.n_facets + 1))
                order = tuple(int(i) for i in rng.choice(poly.n_facets, size=k, replace=False))
                cand = fixed_support_max(poly, order)
                if cand is None:
                    continue
                oracle = slsqp_support_max(poly, order)
                assert oracle is not None
                # a stationary interior point is a lower bound; for the angular order it is the max
                assert cand.q_value <= oracle + 1e-7
                checked += 1
            order = angular_order(poly)
            cand = fixed_support_max(poly, order)
            assert cand.q_value == pytest.approx(slsqp_support_max(poly, order), abs=1e-7)
        assert checked > 0

    def test_candidate_invariants(self, small_corpus):
        for poly in small_corpus:
            cand = fixed_support_max(poly, angular_order(poly))
            assert np.all(cand.beta >= 0)
            assert abs(cand.beta @ poly.heights - 1) <= 1e-9
            assert np.abs(cand.beta @ poly.normals).max() <= 1e-9
            assert abs(quadratic_value(poly, cand.order, cand.beta) - cand.q_value) <= 1e-12

    def test_short_order_rejected(self, square):
        with pytest.raises(ValueError):
            fixed_support_max(square, (0,))


class TestUpperBound:
    def test_optimal(self, square):
        assert upper_bound_from_candidate(square, (0, 1, 2, 3), QUARTER) == pytest.approx(4.0, abs=1e-12)

    def test_suboptimal(self, square):
        beta = np.array([0.3, 0.2, 0.3, 0.2])
        assert quadratic_value(square, (0, 1, 2, 3), beta) == pytest.approx(0.12, abs=1e-15)
        bound = upper_bound_from_candidate(square, (0, 1, 2, 3), beta)
        assert bound == pytest.approx(1 / 0.24, abs=1e-12)
        assert bound >= 4.0

    def test_infeasible_height(self, square):
        with pytest.raises(InfeasibleCandidateError) as info:
            upper_bound_from_candidate(square, (0, 1, 2, 3), np.full(4, 0.3))
        assert info.value.violation > 0

    def test_infeasible_balance(self, square):
        with pytest.raises(InfeasibleCandidateError):
            upper_bound_from_candidate(square, (0, 1, 2, 3), np.array([0.5, 0.5, 0.0, 0.0]))

    def test_nonpositive(self, square):
        with pytest.raises(NonpositiveQError):
            upper_bound_from_candidate(square, (3, 2, 1, 0), QUARTER)

    def test_validate_candidate(self, square):
        validate_candidate(square, (0, 1, 2, 3), QUARTER)
        with pytest.raises(InfeasibleCandidateError):
            validate_candidate(square, (0, 1, 2, 3), np.array([-0.25, 0.25, 0.75, 0.25]))


class TestEhzCapacity:
    def test_square(self, square):
        res = ehz_capacity(square)
        assert res.value == pytest.approx(4.0, abs=1e-9)
        assert res.best.q_value == pytest.approx(1 / 8, abs=1e-12)
        np.testing.assert_allclose(res.best.beta, QUARTER, atol=1e-12)

    def test_scaled_square(self, square):
        assert ehz_capacity(apply_linear(square, 3 * np.eye(2))).value == pytest.approx(36.0, abs=1e-9)

    def test_triangle(self, triangle):
        assert ehz_capacity(triangle).value == pytest.approx(0.5, abs=1e-9)

    def test_64gon(self):
        poly = regular_polygon(64, 1.0)
        value = ehz_capacity(poly).value
        assert value == pytest.approx(volume(poly), abs=1e-9)
        assert abs(value - math.pi) / math.pi < 0.01

    def test_value_matches_certificate(self, small_corpus):
        for poly in small_corpus:
            res = ehz_capacity(poly)
            assert res.value == pytest.approx(1 / (2 * res.best.q_value), rel=1e-12)
            validate_candidate(poly, res.best.order, res.best.beta)
            assert upper_bound_from_candidate(poly, res.best.order, res.best.beta) >= res.value - 1e-9

    def test_area_oracle(self):
        for poly in polygon_corpus(40, seed=31):
            assert ehz_capacity(poly).value == pytest.approx(volume(poly), rel=1e-8)

    def test_default_matches_full_enumeration(self):
        for poly in polygon_corpus(15, seed=41, n_facets=(3, 7)):
            fast = ehz_capacity(poly)
            full = ehz_capacity(poly, full_enumeration=True)
            assert fast.strategy == "planar-angular"
            assert full.strategy == "full-permutation"
            assert abs(fast.value - full.value) <= 1e-10

    def test_balance_holds_under_j(self, small_corpus):
        # the constraint sum beta_i n_i = 0 and its J-image agree
        j = standard_space(1).j_matrix
        for poly in small_corpus:
            beta = ehz_capacity(poly).best.beta
            assert np.abs(j @ (beta @ poly.normals)).max() <= 1e-9

    def test_translation_invariance(self, small_corpus):
        rng = np.random.default_rng(5)
        for poly in small_corpus:
            c = ehz_capacity(poly).value
            assert ehz_capacity(translate(poly, rng.uniform(-3, 3, 2))).value == pytest.approx(c, abs=1e-9)

    def test_conformality(self, small_corpus):
        for poly in small_corpus:
            c = ehz_capacity(poly).value
            assert ehz_capacity(apply_linear(poly, 2 * np.eye(2))).value == pytest.approx(4 * c, abs=1e-9)

    def test_symplectic_invariance(self, small_corpus):
        shear = np.array([[1.0, 0.7], [0.0, 1.0]])
        for poly in small_corpus[:4]:
            c = ehz_capacity(poly).value
            assert ehz_capacity(apply_linear(poly, shear)).value == pytest.approx(c, abs=1e-9)

    def test_monotonicity_nested(self, square):
        inner = from_vertices([(-0.5, -0.9), (1, 0), (0.2, 1), (-1, 0.3)])
        assert ehz_capacity(inner).value <= ehz_capacity(square).value + 1e-9

    def test_box_in_r4(self):
        eye = np.eye(4)
        box = from_halfspaces(4, [(e, 1.0) for e in eye] + [(-e, 1.0) for e in eye])
        res = ehz_capacity(box)
        # a box is the product of two squares of area 4 in the symplectic planes
        assert res.value == pytest.approx(4.0, abs=1e-9)
        assert res.strategy == "support-capped(5)"
        assert res.warnings

    def test_square_has_no_small_balanced_support(self, square):
        # any three of the four square normals leave one unbalanced direction
        with pytest.raises(NoPositiveCandidateError):
            ehz_capacity(square, support_cap=3)

    def test_capped_strategy_reported(self):
        poly = regular_polygon(6, 1.0)
        res = ehz_capacity(poly, support_cap=3)
        assert res.strategy == "support-capped(3)"
        assert res.warnings
        assert res.value >= ehz_capacity(poly).value - 1e-9

    def test_count_ordered_supports(self):
        assert count_ordered_supports(4, 4) == 6 * 1 + 4 * 3 + 12
        assert count_ordered_supports(12, 5) == sum(math.comb(12, k) * math.factorial(k) // 2 for k in range(2, 6))
        assert ehz_capacity(regular_polygon(5), full_enumeration=True).candidates_examined == count_ordered_supports(5, 5)

    def test_budget(self, square):
        with pytest.raises(SearchTooLargeError):
            ehz_capacity(square, full_enumeration=True, max_ordered_supports=10)

    def test_odd_dimension(self):
        eye = np.eye(3)
        cube = from_halfspaces(3, [(e, 1.0) for e in eye] + [(-e, 1.0) for e in eye])
        with pytest.raises(OddDimensionError):
            ehz_capacity(cube)

    def test_options_validation(self):
        with pytest.raises(ValueError):
            SearchOptions(support_cap=1)
        with pytest.raises(ValueError):
            SearchOptions(jobs=0)

    def test_parallel_identical(self):
        poly = polygon_corpus(1, seed=3, n_facets=(6, 6))[0]
        a = ehz_capacity(poly, full_enumeration=True, jobs=1)
        b = ehz_capacity(poly, full_enumeration=True, jobs=3)
        assert a.value == b.value
        assert a.best.order == b.best.order
        np.testing.assert_array_equal(a.best.beta, b.best.beta)
