"""Shared fixtures: bundled instances and seeded random instance factories."""

from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from lib.documents import load_graph
from lib.endowments import Endowments
from lib.graph import Graph
from lib.lexopt import LexOptSolver
from lib.verify import EquilibriumVerifier

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def _random_connected(rng, n, p, complete=False):
    edges = set()
    if complete:
        edges = {(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)}
    else:
        for v in range(2, n + 1):
            edges.add((int(rng.integers(1, v)), v))
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                if rng.random() < p:
                    edges.add((i, j))
    means = {i: Fraction(int(rng.integers(1, 13)), int(rng.integers(1, 5))) for i in range(1, n + 1)}
    return Graph(range(1, n + 1), sorted(edges), require_connected=True), Endowments.from_means(means)


@pytest.fixture
def fixture_path():
    def _path(name):
        return str(FIXTURES / f"{name}.json")

    return _path


@pytest.fixture
def load_fixture(fixture_path):
    def _load(name):
        g, d, _ = load_graph(fixture_path(name))
        return g, d

    return _load


@pytest.fixture
def make_instance():
    def _make(edges, means):
        return Graph(sorted(means), edges, require_connected=True), Endowments.from_means(means)

    return _make


@pytest.fixture(scope="session")
def random_instances():
    """Seeded battery of connected graphs with random rational endowments."""

    def _battery(count, n_min=2, n_max=8, p=0.3, seed=0, complete=False):
        rng = np.random.default_rng(seed)
        return [
            _random_connected(rng, int(rng.integers(n_min, n_max + 1)), p, complete=complete) for _ in range(count)
        ]

    return _battery


@pytest.fixture
def path3(make_instance):
    return make_instance([(1, 2), (2, 3)], {1: 1, 2: 1, 3: 1})


@pytest.fixture
def six_node(load_fixture):
    return load_fixture("six_node_levels")


@pytest.fixture
def solver():
    return LexOptSolver()


@pytest.fixture
def verifier():
    return EquilibriumVerifier()
