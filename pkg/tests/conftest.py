import numpy as np
import pytest

from ehzcap.polytope import from_halfspaces, from_vertices, random_polygon


@pytest.fixture
def square():
    # facet order e1, e2, -e1, -e2
    return from_halfspaces(2, [((1, 0), 1), ((0, 1), 1), ((-1, 0), 1), ((0, -1), 1)])


@pytest.fixture
def triangle():
    return from_vertices([(0, 0), (1, 0), (0, 1)])


def polygon_corpus(count, seed=20240501, n_facets=(3, 6)):
    rng = np.random.default_rng(seed)
    return [random_polygon(rng, n_facets=n_facets, box=2.0) for _ in range(count)]


def random_triangles(count, seed=7):
    return polygon_corpus(count, seed=seed, n_facets=(3, 3))


@pytest.fixture(scope="session")
def small_corpus():
    return polygon_corpus(12, seed=11)


# filled by test_acceptance.py, printed once at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
