"""Orthogonal sets for simple rational polytopes and rank-one axis lattices,
plus the vertex-pair necessary condition for lattice spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import exact
from .errors import (
    AxisEdgeViolation,
    EnumerationExhausted,
    IrrationalAxis,
    NotRational,
    NotSimple,
    NumericModeUnsupported,
)
from .geometry import (
    Polytope,
    affine_map,
    axis_denominator,
    axis_edge_condition,
    is_simple,
    rationality,
)

TWO_PI = 2.0 * math.pi
WITNESS_TOL = 1e-9

Provenance = Literal["thm21", "thm22", "thm25", "user"]


@dataclass(frozen=True)
class Hyperplane0:
    """{w : <normal, w> = 0} with a primitive normal, first nonzero entry > 0."""

    normal: tuple[int, ...]

    def __post_init__(self):
        if not any(self.normal):
            raise ValueError("hyperplane normal must be nonzero")
        if exact.canonical_direction(self.normal) != tuple(self.normal):
            raise ValueError(f"normal {self.normal} is not primitive/canonical")

    def contains(self, k: Sequence[int]) -> bool:
        return sum(a * b for a, b in zip(self.normal, k)) == 0


@dataclass(frozen=True)
class OrthoSet:
    """Finite prefix of an orthogonal set; ``points[0]`` is the origin.

    ``integer_coords`` are the underlying integer labels (lattice coordinates
    for the greedy and axis constructions, span coefficients for zonotope
    lattices) and ``points = scale * integer_coords`` where that applies.
    ``coverage`` is a sup-norm radius in frequency space inside which the
    set is complete, when known.
    """

    dim: int
    points: np.ndarray
    provenance: Provenance
    scale: float
    integer_coords: tuple[tuple[int, ...], ...] = ()
    coverage: float | None = None
    polytope: Polytope | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Witness:
    index: int
    omega: tuple[float, ...]
    vertices: tuple[int, int]
    m: int
    residual: float


@dataclass(frozen=True)
class NecessaryConditionReport:
    records: tuple[Witness | None, ...]  # None marks a violation

    @property
    def violations(self) -> list[int]:
        return [i for i, r in enumerate(self.records) if r is None]

    @property
    def all_witnessed(self) -> bool:
        return not self.violations


def _require_rational_simple(poly: Polytope) -> int:
    if not is_simple(poly):
        raise NotSimple("construction requires a simple polytope")
    try:
        info = rationality(poly)
    except NumericModeUnsupported as exc:
        raise NotRational(str(exc)) from exc
    if not info.fully_rational:
        raise NotRational("construction requires rational vertices")
    return info.common_denominator


def edge_hyperplanes(poly: Polytope) -> list[Hyperplane0]:
    """Hyperplanes through 0 orthogonal to each distinct edge direction."""
    _require_rational_simple(poly)
    seen: dict[tuple[int, ...], None] = {}
    for i, j in poly.edges:
        direction = [b - a for a, b in zip(poly.vertices[i], poly.vertices[j])]
        seen.setdefault(exact.canonical_direction(exact.primitive_integer(direction)), None)
    return [Hyperplane0(n) for n in seen]


def enumeration_order(d: int, radius: int) -> np.ndarray:
    """Integer points of [-radius, radius]^d by sup-norm, ties lexicographic."""
    axis = np.arange(-radius, radius + 1)
    grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    sup = np.abs(grid).max(axis=1)
    keys = [grid[:, c] for c in reversed(range(d))] + [sup]
    return grid[np.lexsort(keys)]


def construct_thm21(poly: Polytope, count: int | None = None,
                    enum_bound: int | None = None) -> OrthoSet:
    """Greedy set in 2 pi n Z^d whose differences avoid every edge hyperplane.

    Candidates are scanned by increasing sup-norm (ties lexicographic); a
    candidate k is taken when <a, k> differs from <a, k_l> for every chosen
    k_l and every hyperplane normal a.  With ``count=None`` the whole box of
    radius ``enum_bound`` is scanned.
    """
    n = _require_rational_simple(poly)
    planes = edge_hyperplanes(poly)
    radius = 64 * n if enum_bound is None else int(enum_bound)
    if count is not None and count < 1:
        raise ValueError("count must be positive")
    normals = np.array([h.normal for h in planes], dtype=np.int64)
    cands = enumeration_order(poly.dim, radius)
    values = cands @ normals.T
    sup = np.abs(cands).max(axis=1)
    used = [set() for _ in planes]
    chosen: list[tuple[int, ...]] = []
    last_shell = radius
    for k, vals, r in zip(cands.tolist(), values.tolist(), sup.tolist()):
        if count is not None and len(chosen) == count:
            last_shell = r - 1
            break
        if any(v in u for v, u in zip(vals, used)):
            continue
        chosen.append(tuple(k))
        for v, u in zip(vals, used):
            u.add(v)
    if count is not None and len(chosen) < count:
        raise EnumerationExhausted(
            f"only {len(chosen)} of {count} points within sup-norm {radius}; "
            "increase enum_bound")
    scale = TWO_PI * n
    pts = scale * np.array(chosen, dtype=float)
    return OrthoSet(poly.dim, pts, "thm21", scale, tuple(chosen),
                    coverage=scale * last_shell, polytope=poly,
                    meta={"n": n, "enum_bound": radius,
                          "hyperplanes": [list(h.normal) for h in planes]})


def construct_thm22(poly: Polytope, axis: int, count: int) -> OrthoSet:
    """Rank-one lattice 2 pi Z e_axis for the polytope scaled by N.

    N is the common denominator of the ``axis`` components; the returned set
    is orthogonal for ``result.polytope`` (= N P), and ``meta['scaling']``
    records N so callers can map back by the affine-invariance remark.
    """
    try:
        per_axis = rationality(poly).per_axis
    except NumericModeUnsupported as exc:
        raise IrrationalAxis(str(exc)) from exc
    if not per_axis[axis]:
        raise IrrationalAxis(f"axis {axis} has non-rational vertex components")
    if not axis_edge_condition(poly, axis):
        raise AxisEdgeViolation(f"an edge lies in a hyperplane where coordinate {axis + 1} is constant")
    if count < 1:
        raise ValueError("count must be positive")
    big_n = axis_denominator(poly, axis)
    scaled = poly
    if big_n != 1:
        scaled = affine_map(poly, [[big_n * int(i == j) for j in range(poly.dim)]
                                   for i in range(poly.dim)])
    coords = tuple(tuple(j * int(c == axis) for c in range(poly.dim)) for j in range(count))
    pts = TWO_PI * np.array(coords, dtype=float)
    return OrthoSet(poly.dim, pts, "thm22", TWO_PI, coords, polytope=scaled,
                    meta={"axis": axis, "scaling": big_n})


def check_thm24(poly: Polytope, points: OrthoSet | np.ndarray) -> NecessaryConditionReport:
    """Find, for every nonzero point w, vertices v != v' with <w, v - v'> in 2 pi Z."""
    if not is_simple(poly):
        raise NotSimple("the vertex-pair condition is stated for simple polytopes")
    pts = points.points if isinstance(points, OrthoSet) else np.asarray(points, dtype=float)
    verts = poly.points
    n = len(verts)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    diffs = np.array([verts[i] - verts[j] for i, j in pairs])
    records: list[Witness | None] = []
    for idx, w in enumerate(pts):
        if not np.any(w):
            continue
        ratio = diffs @ w / TWO_PI
        m = np.rint(ratio)
        err = np.abs(ratio - m)
        hits = np.flatnonzero(err <= WITNESS_TOL)
        if hits.size == 0:
            records.append(None)
            continue
        # an m != 0 pair says more than edge-orthogonality, so prefer it
        nonzero = hits[m[hits] != 0]
        h = int(nonzero[0] if nonzero.size else hits[0])
        records.append(Witness(idx, tuple(float(x) for x in w), pairs[h], int(m[h]), float(err[h])))
    return NecessaryConditionReport(tuple(records))
