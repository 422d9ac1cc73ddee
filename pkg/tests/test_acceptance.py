"""Acceptance criteria 1-12, one test each.

Every test prints ``PASS``/``FAIL`` with the measured numbers; the lines are
also collected and shown in the pytest terminal summary.  Run this file
directly (``python3 tests/test_acceptance.py``) for the lines alone.
"""

from __future__ import annotations

import math
import random
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import random_nonsingular_omega, random_polytopes  # noqa: E402
from orthoexp import exact  # noqa: E402
from orthoexp.constructions import check_thm24, construct_thm21, construct_thm22  # noqa: E402
from orthoexp.fixtures import (EX33_KBAR, EX33_LAMBDA_PRIME, EX33_VERTICES, cube,  # noqa: E402
                               ex32_density, ex32_grid, ex32_hexagon, ex32_line,
                               ex32_s_branches, ex32_spec, ex33_spec, fig1_polygon, triangle)
from orthoexp.fourier import (companion_sum, fourier_lawrence, fourier_oracle_batch,  # noqa: E402
                              moment)
from orthoexp.geometry import project_zonotope  # noqa: E402
from orthoexp.verify import (density_estimate, orthogonality_report,  # noqa: E402
                             sigma_generators)
from orthoexp.zonotope import (WeightedQuadrature, WeightEvaluator, ZonotopeSpec,  # noqa: E402
                               build_lambda, density_bound, integer_kernel,
                               weighted_orthogonality_check)

RESULTS: list[str] = []
SEED = 20240611


def report(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}"
    RESULTS.append(line)
    print(line)


def sweep_polytopes():
    return [fig1_polygon(), cube(2), cube(3)] + random_polytopes(SEED, 20)


def sweep_omegas(poly, count, seed):
    rng = np.random.default_rng(seed)
    # magnitudes spread over two decades
    return [random_nonsingular_omega(poly, rng, scale=float(10 ** rng.uniform(-0.5, 1.5)))
            for _ in range(count)]


# ---------------------------------------------------------------------------


def criterion_1():
    start = time.perf_counter()
    worst = 0.0
    total = 0
    for idx, poly in enumerate(sweep_polytopes()):
        ws = np.array(sweep_omegas(poly, 500, SEED + idx))
        oracle = fourier_oracle_batch(poly, ws)
        vol = float(poly.volume)
        for w, o in zip(ws, oracle):
            err = abs(fourier_lawrence(poly, w).value - o) / (abs(o) + vol)
            worst = max(worst, err)
            total += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed <= 60 and total == 23 * 500
    return ok, f"vertex formula vs oracle, {total} evaluations, worst {worst:.2e} (<= 1e-9), {elapsed:.1f}s (<= 60s)"


def criterion_2():
    worst = 0.0
    for idx, poly in enumerate(sweep_polytopes()):
        for w in sweep_omegas(poly, 100, 7 * SEED + idx):
            for j in range(poly.dim):
                worst = max(worst, companion_sum(poly, w, j).relative)
    return worst <= 1e-9, f"companion sums j=0..d-1, 23 x 100 frequencies, worst relative {worst:.2e} (<= 1e-9)"


def moment_relative(poly, w, j):
    """|lhs - rhs| scaled by |P| max_v |<v, w>|^j, the size of the integrand."""
    r = moment(poly, w, j)
    scale = float(poly.volume) * float(np.abs(poly.points @ w).max()) ** j
    return abs(r.lhs - r.rhs) / max(abs(r.lhs), scale)


def criterion_3():
    worst = 0.0
    for idx, poly in enumerate(sweep_polytopes()):
        for w in sweep_omegas(poly, 100, 7 * SEED + idx):
            for j in (0, 1, 2):
                worst = max(worst, moment_relative(poly, w, j))
    return worst <= 1e-9, f"moment formula j in {{0,1,2}}, worst relative {worst:.2e} (<= 1e-9)"


def criterion_4(state=None):
    start = time.perf_counter()
    lam = construct_thm21(fig1_polygon(), count=50)
    rep = orthogonality_report(fig1_polygon(), lam, tol=1e-8)
    elapsed = time.perf_counter() - start
    if state is not None:
        state["thm21"] = lam
    ok = rep.passed and rep.pair_count == 1225 and elapsed <= 120
    return ok, (f"greedy 50-point set, {rep.pair_count} pairs, max |F|/|P| {rep.max_residual:.2e} "
                f"(<= 1e-8), {elapsed:.2f}s (<= 120s)")


def criterion_5(state=None):
    worst = {}
    for name, poly in (("triangle", triangle()), ("fig1", fig1_polygon())):
        lam = construct_thm22(poly, 0, 21)
        assert lam.meta["scaling"] == 1
        ws = 2 * math.pi * np.outer(np.arange(1, 21), [1.0, 0.0])
        worst[name] = float(np.abs(fourier_oracle_batch(poly, ws)).max() / float(poly.volume))
        if state is not None:
            state[name] = (poly, lam)
    ok = all(v <= 1e-8 for v in worst.values())
    return ok, ("axis lattice j=1..20, max |F|/|P| " +
                ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + " (<= 1e-8)")


def criterion_6():
    state: dict = {}
    criterion_4(state)
    criterion_5(state)
    cases = [(fig1_polygon(), state["thm21"])] + [state[k] for k in ("triangle", "fig1")]
    checked = 0
    worst = 0.0
    missing = 0
    for poly, lam in cases:
        rec = check_thm24(poly, lam)
        missing += len(rec.violations)
        for w in rec.records:
            if w is not None:
                checked += 1
                v, vp = poly.points[w.vertices[0]], poly.points[w.vertices[1]]
                err = abs(np.dot(w.omega, v - vp) / (2 * math.pi) - w.m)
                worst = max(worst, err)
    ok = missing == 0 and worst <= 1e-9 and checked == 49 + 20 + 20
    return ok, f"{checked} nonzero points witnessed, {missing} missing, worst |<w,v-v'>/2pi - m| {worst:.1e} (<= 1e-9)"


def criterion_7():
    parts = []
    ok = True
    for p, q in ((1, 1), (1, 2)):
        spec = ex32_spec(p, q)
        K = integer_kernel(spec)
        target = ex32_density(p, q)
        exact_err = abs(density_bound(spec, K).lattice_density / target - 1)
        est = density_estimate([200.0], generators=sigma_generators(spec, K))
        count_err = max(abs(est.sup_ratios[0] / target - 1), abs(est.inf_ratios[0] / target - 1))
        got = project_zonotope(spec.matrix, 2).points
        want = math.sqrt(2.0) * ex32_hexagon(p, q)
        dist = np.abs(got[:, None, :] - want[None, :, :]).max(axis=2)
        hex_err = max(dist.min(axis=1).max(), dist.min(axis=0).max())
        ok &= exact_err <= 1e-10 and count_err <= 0.05 and hex_err <= 1e-10 and len(got) == 6
        parts.append(f"(p,q)=({p},{q}) det {exact_err:.1e}, box count {count_err:.1%}, hexagon {hex_err:.1e}")
    return ok, "; ".join(parts) + " (limits 1e-10, 5%, 1e-10)"


def criterion_8():
    spec = ex33_spec()
    K = integer_kernel(spec)
    spans = exact.rank(list(K.K)) == 3 and exact.rank(list(K.K) + [list(k) for k in EX33_KBAR]) == 3
    lam = build_lambda(spec, K)
    same = exact.same_lattice(lam.sigma, EX33_LAMBDA_PRIME)
    zono = project_zonotope(spec.matrix, 3)
    want = np.array([[float(x) for x in v] for v in EX33_VERTICES])
    dist = np.abs(zono.points[:, None, :] - want[None, :, :]).max(axis=2)
    vert_err = max(dist.min(axis=1).max(), dist.min(axis=0).max())
    ok = spans and same and zono.n_vertices == 12 and vert_err <= 1e-10
    return ok, (f"kernel spans printed vectors: {spans}; lattice equal to printed generators: {same}; "
                f"{zono.n_vertices} vertices, max deviation {vert_err:.1e} (<= 1e-10)")


def criterion_9():
    spec = ex32_spec(1, 1)
    xs = ex32_grid()
    slice_w = WeightEvaluator(spec, "slice_polytope").batch(xs)
    line_w = WeightEvaluator(spec, "line_length").batch(xs)
    mc_w = WeightEvaluator(spec, "monte_carlo", samples=10**6, seed=SEED).batch(xs)
    line_err = float(np.abs(line_w - slice_w).max())
    mc_err = float(np.abs(mc_w - slice_w).max())
    feasible = 0
    for x1, x2 in xs:
        u, v = ex32_line(1, 1, x1, x2)
        hits = [np.all(np.abs(u + s * v) < 1) for s, cond in ex32_s_branches(1, 1, x1, x2) if cond]
        feasible += bool(hits) and all(hits)
    ok = len(xs) == 25 and line_err <= 1e-8 and mc_err <= 1e-3 and feasible == 25
    return ok, (f"25 grid points, line vs slice {line_err:.1e} (<= 1e-8), Monte Carlo 1e6 vs slice "
                f"{mc_err:.1e} (<= 1e-3), printed s feasible at {feasible}/25")


def criterion_10():
    parts = []
    ok = True
    for name, spec in (("3.2", ex32_spec(1, 1)), ("3.3", ex33_spec())):
        K = integer_kernel(spec)
        quad = WeightedQuadrature(spec)
        pts = build_lambda(spec, K, radius=2).sample.points[1:11]
        rel = [weighted_orthogonality_check(spec, K, p, quad).relative for p in pts]
        mass_err = abs(quad.mass / (spec.abs_det * 2 ** spec.d) - 1)
        ok &= len(rel) == 10 and max(rel) <= 1e-6 and mass_err <= 1e-10
        parts.append(f"example {name} worst {max(rel):.1e}, int W off by {mass_err:.0e}")
    return ok, "weighted residual / int W over 10 points: " + "; ".join(parts) + " (<= 1e-6)"


def criterion_11():
    rhos = [50 * math.pi, 200 * math.pi]
    lam = construct_thm21(fig1_polygon(), enum_bound=200)
    greedy = density_estimate(rhos, points=lam)
    spec = ex32_spec(1, 1)
    lattice = density_estimate(rhos, generators=sigma_generators(spec, integer_kernel(spec)))
    decay = greedy.sup_ratios[1] < greedy.sup_ratios[0]
    sup_change = abs(lattice.sup_ratios[1] / lattice.sup_ratios[0] - 1)
    inf_change = abs(lattice.inf_ratios[1] / lattice.inf_ratios[0] - 1)
    ok = decay and sup_change < 0.10 and inf_change < 0.10
    return ok, (f"greedy sup ratio {greedy.sup_ratios[0]:.3e} -> {greedy.sup_ratios[1]:.3e} (must drop); "
                f"lattice sup/inf change {sup_change:.1%}/{inf_change:.1%} (< 10%)")


def random_rational_spec(rng: random.Random) -> ZonotopeSpec:
    while True:
        d = rng.randint(2, 5)
        m = rng.randint(1, d - 1)
        mat = [[F(rng.randint(-6, 6), rng.randint(1, 5)) for _ in range(d)] for _ in range(d)]
        if exact.det(mat) != 0:
            return ZonotopeSpec(tuple(map(tuple, mat)), m)


def criterion_12():
    rng = random.Random(SEED)
    worst = 0.0
    exact_hits = 0
    for _ in range(50):
        spec = random_rational_spec(rng)
        K = integer_kernel(spec)
        assert K.source == "lemma42_exact"
        db = density_bound(spec, K)
        worst = max(worst, abs(db.det_A_direct * db.det_M / db.det_U - 1))
        exact_hits += bool(db.exact_identity)
    ok = worst <= 1e-9 and exact_hits == 50
    return ok, f"50 random rational (M, m): worst relative {worst:.1e} (<= 1e-9), exact equality {exact_hits}/50"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


@pytest.mark.parametrize("number", range(1, 13))
def test_acceptance(number):
    ok, detail = CRITERIA[number - 1]()
    report(number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for n, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        report(n, ok, detail)
        failures += not ok
    sys.exit(1 if failures else 0)
