"""Convex polytopes from vertex lists, with exact combinatorics.

A ``Polytope`` keeps its vertex coordinates as ``Fraction`` (exact mode) or
``float`` (numeric mode; mixed lists are allowed and mark inexact axes).
Qhull proposes candidate facets; every candidate is then re-derived from its
own points and checked against the full point set, exactly when the input is
rational, so incidence and adjacency never depend on rounding.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import exact
from .errors import (
    AxisOutOfRange,
    DegenerateInput,
    DimensionTooLarge,
    EmptyInput,
    NotSimpleAtVertex,
    NumericModeUnsupported,
    SingularMatrix,
)

MAX_HULL_DIM = 8
MAX_ZONOTOPE_DIM = 20
MERGE_TOL = 1e-12
PLANE_TOL = 1e-9

Coord = Fraction | float
Point = tuple[Coord, ...]


@dataclass(frozen=True)
class Facet:
    normal: tuple        # outward; primitive ints (exact) or unit floats
    offset: Coord        # facet is {x : <normal, x> = offset}
    vertices: tuple[int, ...]

    @property
    def unit_normal(self) -> np.ndarray:
        n = np.array([float(x) for x in self.normal])
        return n / np.linalg.norm(n)


@dataclass(frozen=True)
class EdgeFan:
    vertex: int
    vectors: tuple[Point, ...]

    @property
    def determinant(self) -> Coord:
        if all(exact.is_exact(x) for vec in self.vectors for x in vec):
            return exact.det(self.vectors)
        return float(np.linalg.det(np.array(self.vectors, dtype=float)))


@dataclass(frozen=True)
class Rationality:
    fully_rational: bool
    common_denominator: int | None
    per_axis: tuple[bool, ...]


@dataclass(frozen=True, eq=False)
class Polytope:
    dim: int
    vertices: tuple[Point, ...]
    facets: tuple[Facet, ...]
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]
    _face_dims: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def exact(self) -> bool:
        return all(exact.is_exact(x) for v in self.vertices for x in v)

    @cached_property
    def points(self) -> np.ndarray:
        return np.array([[float(x) for x in v] for v in self.vertices], dtype=float)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def vertex_set(self) -> set[Point]:
        return set(self.vertices)

    def face_dim(self, face: frozenset[int]) -> int:
        if face not in self._face_dims:
            pts = [self.vertices[i] for i in sorted(face)]
            self._face_dims[face] = _affine_rank(pts, self.exact)
        return self._face_dims[face]

    @cached_property
    def triangulation(self) -> tuple[tuple[int, ...], ...]:
        """Pulling triangulation: recursive fans from lexicographically
        smallest vertices.  Each simplex is a tuple of d+1 vertex indices."""
        facet_sets = [frozenset(f.vertices) for f in self.facets]
        key = self._lex_key

        def tri(face: frozenset[int], k: int) -> list[tuple[int, ...]]:
            if len(face) == k + 1:
                return [tuple(sorted(face, key=key))]
            apex = min(face, key=key)
            subfaces = set()
            for fs in facet_sets:
                sub = face & fs
                if apex in sub or len(sub) < k or sub == face:
                    continue
                if self.face_dim(sub) == k - 1:
                    subfaces.add(sub)
            out = []
            for sub in sorted(subfaces, key=lambda s: sorted(s)):
                out.extend((apex,) + simplex for simplex in tri(sub, k - 1))
            return out

        return tuple(tri(frozenset(range(self.n_vertices)), self.dim))

    def _lex_key(self, i: int) -> tuple:
        return tuple(self.vertices[i])

    @cached_property
    def volume(self) -> Coord:
        fact = math.factorial(self.dim)
        if self.exact:
            total = Fraction(0)
            for s in self.triangulation:
                base = self.vertices[s[0]]
                rows = [[a - b for a, b in zip(self.vertices[j], base)] for j in s[1:]]
                total += abs(exact.det(rows))
            return total / fact
        pts = self.points
        total = 0.0
        for s in self.triangulation:
            total += abs(np.linalg.det(pts[list(s[1:])] - pts[s[0]]))
        return total / fact


def _affine_rank(pts: Sequence[Point], exact_mode: bool) -> int:
    if len(pts) <= 1:
        return 0
    base = pts[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in pts[1:]]
    if exact_mode:
        return exact.rank(diffs)
    arr = np.array(diffs, dtype=float)
    scale = max(1.0, float(np.abs(arr).max()))
    return int(np.linalg.matrix_rank(arr, tol=PLANE_TOL * scale))


def _normal_rank(normals: Sequence[tuple], exact_mode: bool) -> int:
    if not normals:
        return 0
    if exact_mode:
        return exact.rank(normals)
    return int(np.linalg.matrix_rank(np.array(normals, dtype=float), tol=1e-9))


def _parse_points(points: Iterable[Sequence], d: int | None) -> list[Point]:
    parsed = [tuple(exact.to_rational(x) for x in p) for p in points]
    if not parsed:
        raise EmptyInput("no points given")
    dims = {len(p) for p in parsed}
    if len(dims) != 1:
        raise DegenerateInput(f"points have inconsistent lengths {sorted(dims)}")
    dim = dims.pop()
    if d is not None and d != dim:
        raise DegenerateInput(f"points have length {dim}, expected d={d}")
    if dim < 1:
        raise DegenerateInput("dimension must be at least 1")
    return parsed


def _dedupe(points: list[Point], exact_mode: bool) -> list[Point]:
    out: list[Point] = []
    if exact_mode:
        seen = set()
        for p in points:
            if p not in seen:
                seen.add(p)
                out.append(p)
        return out
    for p in points:
        if not any(all(abs(float(a) - float(b)) <= MERGE_TOL for a, b in zip(p, q)) for q in out):
            out.append(p)
    return out


def _plane_through(pts: Sequence[Point], exact_mode: bool):
    """Hyperplane (normal, offset) through d points, or None if degenerate."""
    base = pts[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in pts[1:]]
    if exact_mode:
        ns = exact.nullspace(diffs, len(base))
        if len(ns) != 1:
            return None
        n = tuple(exact.primitive_integer(ns[0]))
        b = sum((Fraction(x) * y for x, y in zip(n, base)), Fraction(0))
        return n, b
    arr = np.array(diffs, dtype=float)
    _, s, vt = np.linalg.svd(arr)
    if s.size and s[-1] <= PLANE_TOL * max(1.0, s[0]):
        return None
    n = vt[-1]
    return tuple(float(x) for x in n), float(n @ np.array(base, dtype=float))


def hull_from_vertices(points: Iterable[Sequence], d: int | None = None) -> Polytope:
    """Convex hull of a finite point set, reduced to its extreme points.

    Raises ``DegenerateInput`` when the points span a proper affine subspace.
    """
    pts = _parse_points(points, d)
    dim = len(pts[0])
    if dim > MAX_HULL_DIM:
        raise DimensionTooLarge(f"hull enumeration limited to d <= {MAX_HULL_DIM}, got {dim}")
    exact_mode = all(exact.is_exact(x) for p in pts for x in p)
    pts = _dedupe(pts, exact_mode)
    if len(pts) < dim + 1 or _affine_rank(pts, exact_mode) < dim:
        raise DegenerateInput("points lie in a proper affine subspace")
    if dim == 1:
        return _hull_1d(pts)

    arr = np.array([[float(x) for x in p] for p in pts])
    try:
        qh = ConvexHull(arr)
    except QhullError as exc:  # pragma: no cover - rank check precedes this
        raise DegenerateInput(str(exc)) from exc

    scale = max(1.0, float(np.abs(arr).max()))
    planes: dict[frozenset, tuple] = {}
    for simplex in qh.simplices:
        plane = _plane_through([pts[i] for i in simplex], exact_mode)
        if plane is None:
            continue
        n, b = plane
        if exact_mode:
            s = [sum((x * y for x, y in zip(n, p)), Fraction(0)) - b for p in pts]
            on = frozenset(i for i, v in enumerate(s) if v == 0)
            pos = any(v > 0 for v in s)
            neg = any(v < 0 for v in s)
        else:
            s = arr @ np.array(n) - b
            tol = PLANE_TOL * scale
            on = frozenset(np.flatnonzero(np.abs(s) <= tol).tolist())
            pos = bool((s > tol).any())
            neg = bool((s < -tol).any())
        if pos and neg:
            continue
        if pos:
            n = tuple(-x for x in n)
            b = -b
        if on not in planes:
            planes[on] = (n, b)

    incident: list[list[frozenset]] = [[] for _ in pts]
    for on in planes:
        for i in on:
            incident[i].append(on)
    keep = [i for i in range(len(pts))
            if _normal_rank([planes[f][0] for f in incident[i]], exact_mode) == dim]
    index = {old: new for new, old in enumerate(keep)}
    vertices = tuple(pts[i] for i in keep)
    facets = tuple(
        Facet(normal=n, offset=b, vertices=tuple(sorted(index[i] for i in on if i in index)))
        for on, (n, b) in sorted(planes.items(), key=lambda kv: sorted(kv[0]))
    )
    poly = _with_edges(dim, vertices, facets, exact_mode)
    vol = float(poly.volume)
    if not math.isclose(vol, qh.volume, rel_tol=1e-7, abs_tol=1e-12 * scale ** dim):
        raise DegenerateInput(
            f"facet enumeration incomplete (volume {vol} vs qhull {qh.volume})")
    return poly


def _hull_1d(pts: list[Point]) -> Polytope:
    lo = min(pts, key=lambda p: p[0])
    hi = max(pts, key=lambda p: p[0])
    vertices = (lo, hi)
    one = 1 if exact.is_exact(lo[0]) and exact.is_exact(hi[0]) else 1.0
    facets = (Facet((-one,), -lo[0], (0,)), Facet((one,), hi[0], (1,)))
    return Polytope(1, vertices, facets, ((0, 1),), ((1,), (0,)))


def _with_edges(dim: int, vertices: tuple, facets: tuple[Facet, ...], exact_mode: bool) -> Polytope:
    on_facets: list[list[int]] = [[] for _ in vertices]
    for fi, f in enumerate(facets):
        for v in f.vertices:
            on_facets[v].append(fi)
    edges = []
    for i, j in itertools.combinations(range(len(vertices)), 2):
        common = set(on_facets[i]) & set(on_facets[j])
        if len(common) < dim - 1:
            continue
        if _normal_rank([facets[f].normal for f in common], exact_mode) == dim - 1:
            edges.append((i, j))
    adjacency = [[] for _ in vertices]
    for i, j in edges:
        adjacency[i].append(j)
        adjacency[j].append(i)
    return Polytope(dim, tuple(vertices), facets, tuple(edges),
                    tuple(tuple(sorted(a)) for a in adjacency))


def is_simple(poly: Polytope) -> bool:
    return all(len(a) == poly.dim for a in poly.adjacency)


def rationality(poly: Polytope) -> Rationality:
    flags = [[exact.is_exact(x) for x in v] for v in poly.vertices]
    if not any(any(row) for row in flags):
        raise NumericModeUnsupported("rationality needs exact-rational coordinates")
    per_axis = tuple(all(row[k] for row in flags) for k in range(poly.dim))
    if all(per_axis):
        n = exact.lcm_denominator(x for v in poly.vertices for x in v)
        return Rationality(True, n, per_axis)
    return Rationality(False, None, per_axis)


def axis_denominator(poly: Polytope, axis: int) -> int:
    """Least common denominator of the ``axis`` components of the vertices."""
    _check_axis(poly, axis)
    return exact.lcm_denominator(v[axis] for v in poly.vertices)


def _check_axis(poly: Polytope, axis: int) -> None:
    if not 0 <= axis < poly.dim:
        raise AxisOutOfRange(f"axis {axis} outside 0..{poly.dim - 1}")


def axis_edge_condition(poly: Polytope, axis: int) -> bool:
    """True iff no edge lies in a hyperplane x_axis = c (axis is 0-based)."""
    _check_axis(poly, axis)
    for i, j in poly.edges:
        a, b = poly.vertices[i][axis], poly.vertices[j][axis]
        if exact.is_exact(a) and exact.is_exact(b):
            if a == b:
                return False
        elif abs(float(a) - float(b)) <= MERGE_TOL * max(1.0, abs(float(a))):
            return False
    return True


def edge_fan(poly: Polytope, v: int) -> EdgeFan:
    nbrs = poly.adjacency[v]
    if len(nbrs) != poly.dim:
        raise NotSimpleAtVertex(f"vertex {v} has {len(nbrs)} neighbours, need {poly.dim}")
    base = poly.vertices[v]
    vecs = tuple(tuple(a - b for a, b in zip(poly.vertices[u], base)) for u in nbrs)
    return EdgeFan(v, vecs)


def affine_map(poly: Polytope, matrix: Sequence[Sequence], shift: Sequence | None = None) -> Polytope:
    """Image of ``poly`` under x -> matrix @ x + shift, combinatorics carried over."""
    d = poly.dim
    mat = [[exact.to_rational(x) for x in row] for row in matrix]
    t = [exact.to_rational(x) for x in (shift if shift is not None else [0] * d)]
    if len(mat) != d or any(len(r) != d for r in mat) or len(t) != d:
        raise ValueError("matrix/shift shape does not match polytope dimension")
    exact_mode = poly.exact and all(exact.is_exact(x) for r in mat for x in r) \
        and all(exact.is_exact(x) for x in t)
    if exact_mode:
        if exact.det(mat) == 0:
            raise SingularMatrix("affine map matrix is singular")
        inv_t = exact.transpose(exact.inverse(mat))
        verts = tuple(
            tuple(sum((a * x for a, x in zip(row, v)), Fraction(0)) + s for row, s in zip(mat, t))
            for v in poly.vertices)
        facets = []
        for f in poly.facets:
            n = exact.primitive_integer([sum((a * x for a, x in zip(row, f.normal)), Fraction(0))
                                         for row in inv_t])
            ref = verts[f.vertices[0]]
            b = sum((Fraction(a) * x for a, x in zip(n, ref)), Fraction(0))
            facets.append(Facet(tuple(n), b, f.vertices))
    else:
        m = np.array([[float(x) for x in r] for r in mat])
        if abs(np.linalg.det(m)) <= 1e-14 * max(1.0, np.abs(m).max()) ** d:
            raise SingularMatrix("affine map matrix is singular")
        tv = np.array([float(x) for x in t])
        img = poly.points @ m.T + tv
        verts = tuple(tuple(float(x) for x in row) for row in img)
        inv_t = np.linalg.inv(m).T
        facets = []
        for f in poly.facets:
            n = inv_t @ np.array([float(x) for x in f.normal])
            n /= np.linalg.norm(n)
            facets.append(Facet(tuple(float(x) for x in n), float(n @ img[f.vertices[0]]), f.vertices))
    return Polytope(d, verts, tuple(facets), poly.edges, poly.adjacency)


def zonotope_generators(matrix: Sequence[Sequence], m: int) -> list[list[Coord]]:
    """Projected columns Proj_{R^m}(M e_i), i = 1..d."""
    d = len(matrix)
    return [[matrix[r][c] for r in range(m)] for c in range(d)]


def project_zonotope(matrix: Sequence[Sequence], m: int) -> Polytope:
    """Orthogonal projection of M C_d onto the first m coordinates.

    Built as the Minkowski sum of the projected segments [-g_i, g_i]; all 2^d
    sign combinations are hulled.
    """
    mat = [[exact.to_rational(x) for x in row] for row in matrix]
    d = len(mat)
    if any(len(r) != d for r in mat):
        raise ValueError("matrix must be square")
    if d > MAX_ZONOTOPE_DIM:
        raise DimensionTooLarge(f"zonotope projection limited to d <= {MAX_ZONOTOPE_DIM}")
    if not 1 <= m <= d - 1:
        raise ValueError(f"target dimension m must be in 1..{d - 1}, got {m}")
    exact_mode = all(exact.is_exact(x) for r in mat for x in r)
    if exact_mode:
        if exact.det(mat) == 0:
            raise SingularMatrix("zonotope matrix is singular")
    else:
        arr = np.array([[float(x) for x in r] for r in mat])
        if abs(np.linalg.det(arr)) <= 1e-14 * max(1.0, np.abs(arr).max()) ** d:
            raise SingularMatrix("zonotope matrix is singular")
    gens = zonotope_generators(mat, m)
    if exact_mode:
        sums = set()
        for signs in itertools.product((-1, 1), repeat=d):
            sums.add(tuple(sum((s * g[k] for s, g in zip(signs, gens)), Fraction(0)) for k in range(m)))
        pts = sorted(sums)
    else:
        g = np.array([[float(x) for x in row] for row in gens])
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=d)))
        pts = [tuple(float(x) for x in row) for row in signs @ g]
    return hull_from_vertices(pts, m)


def polytope_from_json(obj: dict) -> Polytope:
    if "vertices" not in obj:
        raise EmptyInput("polytope JSON needs a 'vertices' list")
    return hull_from_vertices(obj["vertices"], obj.get("dim"))


def polytope_to_json(poly: Polytope) -> dict:
    return {"dim": poly.dim,
            "vertices": [[exact.format_rational(x) for x in v] for v in poly.vertices]}
