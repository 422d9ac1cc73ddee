import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest

from conftest import random_polytopes
from orthoexp.constructions import (Hyperplane0, check_thm24, construct_thm21, construct_thm22,
                                    edge_hyperplanes, enumeration_order)
from orthoexp.errors import (AxisEdgeViolation, EnumerationExhausted, IrrationalAxis, NotRational,
                             NotSimple)
from orthoexp.fixtures import cube, fig1_polygon, triangle
from orthoexp.fourier import fourier_oracle_batch
from orthoexp.geometry import hull_from_vertices

# Replays of the greedy rule written independently below (pure Python, no
# numpy): the first eight admissible points for each polygon.
FIG1_GREEDY = [(0, 0), (-1, 0), (1, 0), (-2, 0), (2, 0), (-3, 0), (3, 0), (-4, 0)]
C2_GREEDY = [(0, 0), (-1, -1), (1, 1), (-2, -2), (2, 2), (-3, -3)]


def naive_greedy(edge_vectors, count, radius=10):
    d = len(edge_vectors[0])
    cands = sorted(itertools.product(range(-radius, radius + 1), repeat=d),
                   key=lambda k: (max(map(abs, k)), k))
    chosen = []
    for k in cands:
        ok = True
        for c in chosen:
            diff = [a - b for a, b in zip(k, c)]
            if any(sum(a * b for a, b in zip(diff, e)) == 0 for e in edge_vectors):
                ok = False
                break
        if ok:
            chosen.append(k)
            if len(chosen) == count:
                return chosen
    raise AssertionError("radius too small")


def edge_vectors(poly):
    return [[b - a for a, b in zip(poly.vertices[i], poly.vertices[j])] for i, j in poly.edges]


def test_naive_replay_matches_frozen():
    assert naive_greedy(edge_vectors(fig1_polygon()), 8) == FIG1_GREEDY
    assert naive_greedy(edge_vectors(cube(2)), 6) == C2_GREEDY


def test_fig1_greedy_prefix():
    got = construct_thm21(fig1_polygon(), count=8)
    assert list(got.integer_coords) == FIG1_GREEDY
    assert got.scale == pytest.approx(2 * math.pi)
    np.testing.assert_allclose(got.points, 2 * math.pi * np.array(FIG1_GREEDY))


def test_square_greedy_prefix():
    got = construct_thm21(cube(2), count=6)
    assert list(got.integer_coords) == C2_GREEDY


@pytest.mark.parametrize("poly", random_polytopes(31, 6))
def test_greedy_matches_naive_replay(poly):
    got = construct_thm21(poly, count=6, enum_bound=12)
    assert list(got.integer_coords) == [tuple(k) for k in naive_greedy(edge_vectors(poly), 6, 12)]


def test_edge_hyperplanes_examples():
    normals = {h.normal for h in edge_hyperplanes(fig1_polygon())}
    assert normals == {(1, 0), (1, 1), (1, -1)}
    assert len(edge_hyperplanes(cube(2))) == 2
    assert len(edge_hyperplanes(hull_from_vertices([(0, 0), (1, 0), (0, 1)]))) == 3


def test_fig1_hyperplanes_are_edge_orthogonals():
    # the lines H_i are orthogonal to the edge directions (2,0), (1,1), (-1,1)
    for h in edge_hyperplanes(fig1_polygon()):
        assert any(h.contains(e) for e in [(0, 1), (1, -1), (1, 1)])


def test_hyperplane_validation():
    with pytest.raises(ValueError):
        Hyperplane0((0, 0))
    with pytest.raises(ValueError):
        Hyperplane0((2, 4))
    assert Hyperplane0((1, -2)).contains((2, 1))


def test_enumeration_order_prefix():
    order = enumeration_order(2, 1).tolist()
    assert order[0] == [0, 0]
    assert order[1:] == sorted(order[1:])


def test_thm21_errors():
    pyr = hull_from_vertices([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0), (F(1, 2), F(1, 2), 1)])
    with pytest.raises(NotSimple):
        construct_thm21(pyr, count=2)
    irr = hull_from_vertices([(0, 0), (1, 0), (0, math.sqrt(2))])
    with pytest.raises(NotRational):
        construct_thm21(irr, count=2)
    with pytest.raises(EnumerationExhausted):
        construct_thm21(fig1_polygon(), count=50, enum_bound=3)


def test_thm21_denominator_scale():
    half = hull_from_vertices([(0, 0), (F(1, 2), 0), (0, F(1, 3))])
    got = construct_thm21(half, count=4)
    assert got.scale == pytest.approx(12 * math.pi)
    rep = np.abs(fourier_oracle_batch(half, got.points[1:])) / float(half.volume)
    assert rep.max() < 1e-8


def test_thm21_determinism():
    a = construct_thm21(fig1_polygon(), count=30)
    b = construct_thm21(fig1_polygon(), count=30)
    assert a.integer_coords == b.integer_coords


@pytest.mark.parametrize("poly", [fig1_polygon(), cube(2), cube(3)] + random_polytopes(5, 8))
def test_thm21_difference_closure(poly):
    got = construct_thm21(poly, count=12, enum_bound=24)
    planes = edge_hyperplanes(poly)
    ks = got.integer_coords
    assert len(set(ks)) == len(ks) and ks[0] == (0,) * poly.dim
    for a, b in itertools.combinations(ks, 2):
        diff = [x - y for x, y in zip(a, b)]
        assert not any(h.contains(diff) for h in planes)
    i, j = np.triu_indices(len(ks), 1)
    res = np.abs(fourier_oracle_batch(poly, got.points[i] - got.points[j])) / float(poly.volume)
    assert res.max() <= 1e-8
    assert check_thm24(poly, got).all_witnessed


def test_thm22_triangle():
    got = construct_thm22(triangle(), 0, 5)
    np.testing.assert_allclose(got.points[:, 0], 2 * math.pi * np.arange(5))
    assert np.all(got.points[:, 1] == 0)
    assert got.meta["scaling"] == 1
    res = np.abs(fourier_oracle_batch(triangle(), got.points[1:])) / float(triangle().volume)
    assert res.max() <= 1e-8


def test_thm22_fig1_axis0():
    got = construct_thm22(fig1_polygon(), 0, 20)
    res = np.abs(fourier_oracle_batch(fig1_polygon(), got.points[1:])) / 3.0
    assert res.max() <= 1e-8


def test_thm22_scaled_polytope():
    tri = hull_from_vertices([(0, 0), (F(1, 3), 0), (F(2, 3), 1)])
    got = construct_thm22(tri, 0, 6)
    assert got.meta["scaling"] == 3
    assert got.polytope.vertex_set() == {(0, 0), (1, 0), (2, 3)}
    res = np.abs(fourier_oracle_batch(got.polytope, got.points[1:])) / float(got.polytope.volume)
    assert res.max() <= 1e-8


def test_thm22_errors():
    square = hull_from_vertices([(0, 0), (1, 0), (0, 1), (1, 1)])
    with pytest.raises(AxisEdgeViolation):
        construct_thm22(square, 0, 3)
    with pytest.raises(AxisEdgeViolation):
        construct_thm22(fig1_polygon(), 1, 3)
    irr = hull_from_vertices([(0, 0), (math.sqrt(2), 0.5), (0.5, 1)])
    with pytest.raises(IrrationalAxis):
        construct_thm22(irr, 0, 3)


def test_thm24_square_witness():
    rep = check_thm24(cube(2), np.array([[0, 0], [math.pi, 0]]))
    (w,) = rep.records
    assert abs(w.m) == 1 and w.residual <= 1e-9
    assert rep.all_witnessed


def test_thm24_orthogonal_to_edge_gives_m0():
    # (0, 1) is orthogonal to the horizontal edge (-1,0)-(1,0) of Fig. 1
    rep = check_thm24(fig1_polygon(), np.array([[0, 0], [0, 1.0]]))
    assert rep.records[0].m == 0


def test_thm24_reports_violation():
    rep = check_thm24(cube(2), np.array([[0, 0], [1.0, 0.5]]))
    assert rep.violations == [0] and not rep.all_witnessed


def test_thm24_thm22_output():
    got = construct_thm22(triangle(), 0, 10)
    assert check_thm24(triangle(), got).all_witnessed
