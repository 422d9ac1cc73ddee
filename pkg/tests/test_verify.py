import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orthoexp.constructions import construct_thm21, construct_thm22
from orthoexp.errors import SourceTooSmall
from orthoexp.fixtures import cube, ex32_density, ex32_spec, ex33_spec, fig1_polygon, triangle
from orthoexp.verify import (density_estimate, lattice_points, orthogonality_report,
                             sigma_generators, weighted_orthogonality_report)
from orthoexp.zonotope import build_lambda, integer_kernel


@pytest.fixture(scope="module")
def fig1_set():
    return construct_thm21(fig1_polygon(), count=20)


def test_report_passes_on_greedy(fig1_set):
    rep = orthogonality_report(fig1_polygon(), fig1_set)
    assert rep.passed and rep.pair_count == 190


def test_report_fails_on_square_unit_step():
    rep = orthogonality_report(cube(2), np.array([[0.0, 0.0], [1.0, 0.0]]))
    assert not rep.passed
    # |F| / |P| = 4 sin(1) / 4
    assert rep.max_residual == pytest.approx(math.sin(1), rel=1e-12)
    assert rep.failing_pairs[0][:2] == (0, 1)


def test_report_vacuous():
    rep = orthogonality_report(cube(2), np.zeros((1, 2)))
    assert rep.passed and rep.pair_count == 0 and rep.max_residual == 0.0


def test_report_fails_when_nudged(fig1_set):
    pts = fig1_set.points.copy()
    pts[3] += 0.1
    assert not orthogonality_report(fig1_polygon(), pts).passed


def test_report_thm22():
    got = construct_thm22(triangle(), 0, 12)
    assert orthogonality_report(got.polytope, got).passed


def test_report_chunking_consistent(fig1_set):
    a = orthogonality_report(fig1_polygon(), fig1_set, chunk=7)
    b = orthogonality_report(fig1_polygon(), fig1_set)
    assert a.max_residual == pytest.approx(b.max_residual, abs=1e-18)


def test_weighted_report_ex33():
    spec = ex33_spec()
    lam = build_lambda(spec, integer_kernel(spec), radius=1)
    rep = weighted_orthogonality_report(spec, lam.sample.points[:8])
    assert rep.passed and rep.weighted and rep.pair_count == 28


def test_lattice_points_square():
    pts = lattice_points(np.eye(2), -1.5, 1.5)
    assert len(pts) == 9


def test_density_two_pi_lattice():
    est = density_estimate([100.0], generators=2 * math.pi * np.eye(2))
    target = 1 / (4 * math.pi ** 2)
    assert est.reference == pytest.approx(target)
    assert est.sup_ratios[0] == pytest.approx(target, rel=0.05)
    assert est.inf_ratios[0] <= est.sup_ratios[0]


def test_density_ex32_converges():
    spec = ex32_spec(1, 1)
    gens = sigma_generators(spec, integer_kernel(spec))
    est = density_estimate([50.0, 200.0], generators=gens)
    target = ex32_density(1, 1)
    assert est.sup_ratios[-1] == pytest.approx(target, rel=0.05)
    assert est.inf_ratios[-1] == pytest.approx(target, rel=0.05)
    gap = [s - i for s, i in zip(est.sup_ratios, est.inf_ratios)]
    assert gap[1] < gap[0]


def test_density_ex32_lattice_at_100():
    spec = ex32_spec(1, 1)
    est = density_estimate([100.0], generators=sigma_generators(spec, integer_kernel(spec)))
    assert est.sup_ratios[0] == pytest.approx(est.reference, rel=0.05)
    assert est.inf_ratios[0] == pytest.approx(est.reference, rel=0.05)


def test_density_ex33_lattice_at_400():
    # generators of length ~18 in three dimensions: boundary effects need rho = 400
    spec = ex33_spec()
    est = density_estimate([400.0], generators=sigma_generators(spec, integer_kernel(spec)))
    assert est.sup_ratios[0] == pytest.approx(est.reference, rel=0.05)
    assert est.inf_ratios[0] == pytest.approx(est.reference, rel=0.05)


def test_density_source_too_small(fig1_set):
    with pytest.raises(SourceTooSmall):
        density_estimate([100.0], points=fig1_set)
    with pytest.raises(SourceTooSmall):
        density_estimate([1.0], points=np.zeros((1, 2)))
    with pytest.raises(ValueError):
        density_estimate([1.0])


def test_density_landau_reference():
    full = construct_thm21(fig1_polygon(), enum_bound=20)
    est = density_estimate([10.0], points=full, polytope=fig1_polygon())
    assert est.landau == pytest.approx(3 / (4 * math.pi ** 2))


@settings(max_examples=15, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=2, max_size=2), min_size=2, max_size=2),
       st.floats(0.5, 2.0))
def test_density_of_random_lattice(rows, scale):
    b = scale * np.array(rows, dtype=float)
    norms = np.linalg.norm(b, axis=1)
    if norms.min() == 0 or abs(np.linalg.det(b)) < 0.5 * norms.prod():
        return  # keep reasonably conditioned bases so the point count stays small
    rho = 200 * np.linalg.norm(b, axis=1).max()
    est = density_estimate([rho], generators=b)
    assert est.sup_ratios[0] == pytest.approx(est.reference, rel=0.05)
    assert est.inf_ratios[0] == pytest.approx(est.reference, rel=0.05)


def test_counts_monotone_and_ordered():
    est = density_estimate([10.0, 20.0, 40.0], generators=np.eye(2))
    assert list(est.sup_counts) == sorted(est.sup_counts)
    assert all(s >= i >= 0 for s, i in zip(est.sup_counts, est.inf_counts))


def brute_counts(pts, rho, d):
    axis = np.linspace(-rho, rho, 17)
    anchors = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), -1).reshape(-1, d)
    edges = np.linspace(-rho, 2 * rho, 25)
    lo = {a: edges[i] for i, a in enumerate(axis)}
    hi = {a: edges[i + 8] for i, a in enumerate(axis)}
    return np.array([np.count_nonzero(np.all([(pts[:, c] >= lo[a[c]]) & (pts[:, c] < hi[a[c]])
                                              for c in range(d)], axis=0)) for a in anchors])


@pytest.mark.parametrize("d", [1, 2, 3])
def test_window_counts_match_brute_force(d):
    rng = np.random.default_rng(d)
    rho = 8.0
    pts = np.vstack([rng.uniform(-9, 17, size=(400, d)),
                     np.round(rng.uniform(-8, 16, size=(100, d)))])  # many on cell edges
    est = density_estimate([rho], points=pts, coverage=2 * rho)
    counts = brute_counts(pts, rho, d)
    assert est.sup_counts[0] == counts.max()
    assert est.inf_counts[0] == counts.min()
