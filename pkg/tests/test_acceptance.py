"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line; the lines are printed together in
the terminal summary (see ``conftest.py``) so the tee'd log reads as a table.
"""
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from ehzcap import bounds
from ehzcap.capacity import ehz_capacity, upper_bound_from_candidate
from ehzcap.errors import NoPositiveCandidateError
from ehzcap.polytope import (
    apply_linear,
    bounding_box,
    from_vertices,
    min_sum_squared_distances,
    regular_polygon,
    translate,
    volume,
)
from ehzcap.products import jk_product, kk_product
from ehzcap.serialization import polytope_to_dict

from conftest import ACCEPTANCE_LINES, polygon_corpus, random_triangles
from test_polytope import grid_min_sum

SQUARE = from_vertices([(1, 1), (-1, 1), (-1, -1), (1, -1)])
TRIANGLE = from_vertices([(0, 0), (1, 0), (0, 1)])


def record(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


@pytest.fixture(scope="module")
def corpus():
    return polygon_corpus(100)


@pytest.fixture(scope="module")
def theorem_reports(corpus):
    t0 = time.perf_counter()
    jk = [bounds.check_theorem_jk(p) for p in corpus]
    kk = [bounds.check_theorem_kk(p) for p in corpus]
    return jk, kk, time.perf_counter() - t0


def test_criterion_01_square():
    t0 = time.perf_counter()
    res = ehz_capacity(SQUARE)
    elapsed = time.perf_counter() - t0
    beta = np.sort(res.best.beta)
    ok = (
        abs(res.value - 4.0) <= 1e-9
        and np.allclose(beta, 0.25, atol=1e-9)
        and abs(res.best.q_value - 0.125) <= 1e-12
        and abs(res.value - volume(SQUARE)) <= 1e-9
        and elapsed < 1.0
    )
    assert record(1, ok, f"square capacity {res.value:.12f}, q {res.best.q_value:.12f}, {elapsed:.3f} s")


def test_criterion_02_disk():
    t0 = time.perf_counter()
    values = [ehz_capacity(regular_polygon(m, 1.0)).value for m in (8, 16, 32, 64)]
    elapsed = time.perf_counter() - t0
    rel = abs(values[-1] - math.pi) / math.pi
    ok = rel < 0.01 and all(a < b for a, b in zip(values, values[1:])) and elapsed < 5.0
    shown = ", ".join(f"{v:.6f}" for v in values)
    assert record(2, ok, f"m=8..64 -> {shown}; 64-gon off pi by {rel:.2%}; {elapsed:.2f} s")


def test_criterion_03_theorem_jk(corpus, theorem_reports):
    jk, _, elapsed = theorem_reports
    certified = 0
    for poly, r in zip(corpus, jk):
        c = r.certificate["candidate"]
        if upper_bound_from_candidate(jk_product(poly), c["order"], c["beta"]) <= r.rhs + 1e-9:
            certified += 1
    worst = min(r.slack for r in jk)
    ok = all(r.slack >= -1e-8 for r in jk) and certified == len(corpus) and elapsed < 600
    assert record(3, ok, f"{sum(r.passed for r in jk)}/{len(jk)} passed, min slack {worst:.3e}, "
                         f"{certified} lifted certificates, {elapsed:.1f} s for both theorem suites")


def test_criterion_04_theorem_kk(corpus, theorem_reports):
    _, kk, elapsed = theorem_reports
    worst_identity = 0.0
    for poly, r in zip(corpus, kk):
        cand = r.certificate["candidate"]
        beta = 2 * np.array(cand["beta"][: poly.n_facets])
        worst_identity = max(worst_identity, abs(cand["q_value"] - np.sum(beta ** 2) / 4))
    ok = all(r.passed for r in kk) and worst_identity <= 1e-12 and elapsed < 600
    assert record(4, ok, f"{sum(r.passed for r in kk)}/{len(kk)} passed, "
                         f"max |q - sum(beta^2)/4| = {worst_identity:.1e}")


def test_criterion_05_corollary_area(corpus):
    reports = [bounds.check_corollary_area(p) for p in corpus]
    ok = all(r.lhs <= 2 * volume(p) + 1e-8 for p, r in zip(corpus, reports))
    worst = min(r.slack for r in reports)
    assert record(5, ok, f"{sum(r.passed for r in reports)}/{len(reports)} passed, min slack {worst:.3e}")


def test_criterion_06_distance():
    square_rhs = bounds.check_corollary_distance(SQUARE).rhs
    worst = 0.0
    for poly in random_triangles(20):
        value = min_sum_squared_distances(poly)[1]
        worst = max(worst, abs(value - grid_min_sum(poly)[1]))
    ok = square_rhs == 8.0 and worst <= 1e-3
    assert record(6, ok, f"square rhs {square_rhs!r}; max |QP - grid| over 20 triangles {worst:.2e}")


def test_criterion_07_remark(corpus):
    polys = corpus[:20]
    jk_ratios = [bounds.viterbo_ratio(jk_product(p)) for p in polys]
    planar = [bounds.viterbo_ratio(p) for p in polys]
    ok = max(jk_ratios) <= math.sqrt(2) + 1e-8 and max(abs(r - 1) for r in planar) <= 1e-8
    assert record(7, ok, f"max JK-product ratio {max(jk_ratios):.6f} (sqrt2 = {math.sqrt(2):.6f}); "
                         f"max |planar ratio - 1| {max(abs(r - 1) for r in planar):.1e}")


def _capped_vs_full(body, cap):
    full = ehz_capacity(body, full_enumeration=True).value
    try:
        capped = ehz_capacity(body, support_cap=cap).value
    except NoPositiveCandidateError:
        return full, None
    return full, capped


def test_criterion_08_cap_equivalence(corpus):
    bodies = [p for p in corpus if p.n_facets <= 7]
    bodies += [jk_product(TRIANGLE), kk_product(TRIANGLE)]
    mismatched, missing = 0, 0
    worst = 0.0
    for body in bodies:
        full, capped = _capped_vs_full(body, body.dim + 1)
        if capped is None:
            missing += 1
        elif abs(capped - full) > 1e-10:
            mismatched += 1
            worst = max(worst, abs(capped - full))
    ok = mismatched == 0 and missing == 0
    assert record(8, ok, f"cap d+1 vs full on {len(bodies)} bodies: {mismatched} differ "
                         f"(worst {worst:.3e}), {missing} with no capped candidate")


def test_criterion_09_axioms(corpus):
    rng = np.random.default_rng(2024)
    worst_t = 0.0
    for i in range(50):
        poly = corpus[i]
        c = ehz_capacity(poly).value
        worst_t = max(worst_t, abs(ehz_capacity(translate(poly, rng.uniform(-2, 2, 2))).value - c))
    worst_c = 0.0
    box_violations = 0
    for poly in corpus:
        c = ehz_capacity(poly).value
        worst_c = max(worst_c, abs(ehz_capacity(apply_linear(poly, 2 * np.eye(2))).value - 4 * c))
        if c > ehz_capacity(bounding_box(poly)).value + 1e-9:
            box_violations += 1
    ok = worst_t <= 1e-9 and worst_c <= 1e-9 and box_violations == 0
    assert record(9, ok, f"translation max delta {worst_t:.1e}; conformality max delta {worst_c:.1e}; "
                         f"{box_violations} monotonicity violations")


def test_criterion_10_determinism(tmp_path, corpus):
    poly = next(p for p in corpus if p.n_facets == 6)
    src = tmp_path / "hexagon.json"
    src.write_text(json.dumps(polytope_to_dict(poly)))
    outputs = []
    for jobs in (1, 8):
        out = tmp_path / f"bounds-{jobs}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "ehzcap", "bounds", str(src), "--format", "json",
             "--jobs", str(jobs), "-o", str(out)],
            capture_output=True, text=True, check=False,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(out.read_bytes())
    ok = outputs[0] == outputs[1]
    assert record(10, ok, f"bounds JSON with jobs=1 and jobs=8: {len(outputs[0])} bytes, "
                          f"{'identical' if ok else 'different'}")
