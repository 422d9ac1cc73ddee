from __future__ import annotations

import itertools
import random
import sys
from fractions import Fraction

import numpy as np
import pytest

from orthoexp import exact
from orthoexp.geometry import Polytope, hull_from_vertices, is_simple


def halfspace_vertices(normals, offsets):
    """Exact vertices of {x : <n_i, x> <= c_i} by enumerating d-subsets."""
    d = len(normals[0])
    verts = set()
    for subset in itertools.combinations(range(len(normals)), d):
        rows = [normals[i] for i in subset]
        if exact.det(rows) == 0:
            continue
        x = exact.solve(rows, [offsets[i] for i in subset])
        if all(sum(Fraction(a) * b for a, b in zip(n, x)) <= c for n, c in zip(normals, offsets)):
            verts.add(tuple(x))
    return sorted(verts)


def random_simple_polytope(rng: random.Random, d: int) -> Polytope:
    """Box [-2, 2]^d cut by a few random rational halfspaces; retried until simple."""
    while True:
        normals = [tuple(int(i == j) * s for j in range(d)) for i in range(d) for s in (1, -1)]
        offsets = [Fraction(2)] * (2 * d)
        for _ in range(rng.randint(1, 3)):
            n = tuple(rng.randint(-3, 3) for _ in range(d))
            if not any(n):
                continue
            reach = sum(2 * abs(a) for a in n)
            normals.append(n)
            offsets.append(Fraction(rng.randint(1, 3 * reach - 1), 3))
        if d == 2 and rng.random() < 0.5:
            pts = [(Fraction(rng.randint(-9, 9), rng.randint(1, 4)),
                    Fraction(rng.randint(-9, 9), rng.randint(1, 4))) for _ in range(7)]
            try:
                poly = hull_from_vertices(pts)
            except Exception:
                continue
            return poly
        verts = halfspace_vertices(normals, offsets)
        if len(verts) <= d:
            continue
        poly = hull_from_vertices(verts)
        if is_simple(poly):
            return poly


def random_polytopes(seed: int, count: int) -> list[Polytope]:
    rng = random.Random(seed)
    return [random_simple_polytope(rng, rng.choice((2, 3))) for _ in range(count)]


def random_nonsingular_omega(poly: Polytope, rng: np.random.Generator, scale: float = 5.0) -> np.ndarray:
    from orthoexp.fourier import singular_edge

    while True:
        w = rng.normal(scale=scale, size=poly.dim)
        if singular_edge(poly, w) is None:
            return w


@pytest.fixture(scope="session")
def test_polytopes():
    from orthoexp.fixtures import cube, fig1_polygon

    return [fig1_polygon(), cube(2), cube(3)] + random_polytopes(2024, 20)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
