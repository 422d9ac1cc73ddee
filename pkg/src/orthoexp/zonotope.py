"""Projected cubes: integer kernels, the lattice Lambda, density bounds and
the fiber-volume weight W_{M,m}.

A zonotope here is the orthogonal projection of M C_d onto the first m
coordinates.  Integer vectors k with <k, M^{-1} e_i> = 0 for i > m make
x -> exp(i pi <k, M^{-1} x>) depend only on the projected coordinates, which
turns orthogonality on the cube into weighted orthogonality on the
projection.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Literal, Sequence

import numpy as np
from scipy import integrate, linalg, optimize
from scipy.spatial import ConvexHull, Delaunay, HalfspaceIntersection, QhullError

from . import exact
from .constructions import OrthoSet, enumeration_order
from .errors import (
    AmbiguousReconstruction,
    DependentSigmas,
    InvalidKernel,
    LambdaNotInSet,
    MethodUnavailable,
    NoIntegerKernel,
    NoIntersection,
    NotInterior,
    SingularMatrix,
    SingularU,
)
from .fourier import exp_divided_difference
from .geometry import MAX_ZONOTOPE_DIM, project_zonotope

KERNEL_RTOL = 1e-9
RATIONAL_TOL = 1e-8
AMBIGUOUS_TOL = 1e-4
MAX_DENOMINATOR = 10**6
FOURIER_CUTOFF = 1e3
FEASIBLE_TOL = 1e-11
MAX_VERTEX_SUBSETS = 20000

WeightMethod = Literal["slice_polytope", "line_length", "fourier_slice", "monte_carlo"]
KernelSource = Literal["lemma42_exact", "lemma42_reconstructed", "user"]


@dataclass(frozen=True)
class ZonotopeSpec:
    """Matrix M (rows; Fraction entries for exact work) and target dim m."""

    matrix: tuple[tuple, ...]
    m: int
    kernel: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        rows = tuple(tuple(exact.to_rational(x) for x in r) for r in self.matrix)
        object.__setattr__(self, "matrix", rows)
        d = len(rows)
        if d < 2 or any(len(r) != d for r in rows):
            raise ValueError("matrix must be square with d >= 2")
        if d > MAX_ZONOTOPE_DIM:
            raise ValueError(f"d <= {MAX_ZONOTOPE_DIM} required")
        if not 1 <= self.m <= d - 1:
            raise ValueError(f"m must lie in 1..{d - 1}")
        if self.kernel is not None:
            object.__setattr__(self, "kernel", tuple(tuple(int(x) for x in k) for k in self.kernel))
        if self.exact:
            if exact.det(rows) == 0:
                raise SingularMatrix("M is singular")
        elif abs(np.linalg.det(self.array)) <= 1e-14 * max(1.0, np.abs(self.array).max()) ** d:
            raise SingularMatrix("M is numerically singular")

    @property
    def d(self) -> int:
        return len(self.matrix)

    @property
    def exact(self) -> bool:
        return all(exact.is_exact(x) for r in self.matrix for x in r)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.matrix])

    @cached_property
    def inverse_exact(self) -> list[list[Fraction]]:
        if not self.exact:
            raise ValueError("exact inverse needs a rational matrix")
        return exact.inverse(self.matrix)

    @cached_property
    def inverse(self) -> np.ndarray:
        if self.exact:
            return np.array([[float(x) for x in r] for r in self.inverse_exact])
        return np.linalg.inv(self.array)

    @cached_property
    def abs_det(self) -> float:
        if self.exact:
            return float(abs(exact.det(self.matrix)))
        return float(abs(np.linalg.det(self.array)))

    def is_orthogonal(self, tol: float = 1e-12) -> bool:
        a = self.array
        return bool(np.abs(a @ a.T - np.eye(self.d)).max() <= tol)

    @classmethod
    def from_json(cls, obj: dict) -> "ZonotopeSpec":
        return cls(tuple(tuple(r) for r in obj["matrix"]), int(obj["m"]),
                   tuple(tuple(k) for k in obj["kernel"]) if obj.get("kernel") else None)


@dataclass(frozen=True)
class KernelBasis:
    K: tuple[tuple[int, ...], ...]
    source: KernelSource
    residual: float  # max relative annihilation residual

    @property
    def array(self) -> np.ndarray:
        return np.array(self.K, dtype=float)


def _constraint_rows(spec: ZonotopeSpec) -> np.ndarray:
    """Rows (M^{-1} e_i)^T for i = m+1..d."""
    return spec.inverse[:, spec.m:].T


def annihilation_residual(spec: ZonotopeSpec, K: Sequence[Sequence[int]]) -> float:
    """max |<k_j, M^{-1} e_i>| / (|k_j| |M^{-1} e_i|) over i > m; exactly 0 when
    a rational M satisfies the condition."""
    if spec.exact:
        cols = [[spec.inverse_exact[r][i] for r in range(spec.d)] for i in range(spec.m, spec.d)]
        if all(sum((Fraction(a) * b for a, b in zip(k, c)), Fraction(0)) == 0 for k in K for c in cols):
            return 0.0
    b = _constraint_rows(spec)
    k = np.asarray(K, dtype=float)
    vals = np.abs(k @ b.T)
    scale = np.outer(np.linalg.norm(k, axis=1), np.linalg.norm(b, axis=1))
    return float((vals / scale).max())


def _canonical_kernel(rows: Sequence[Sequence]) -> tuple[tuple[int, ...], ...]:
    ints = [exact.primitive_integer(r) for r in rows]
    return tuple(tuple(r) for r in exact.hermite_normal_form(exact.saturate(ints)))


def _rationalize_entry(x: float) -> Fraction:
    frac, _ = exact.rationalize(x, MAX_DENOMINATOR, RATIONAL_TOL)
    if frac is not None:
        return frac
    near, resid = exact.rationalize(x, MAX_DENOMINATOR, AMBIGUOUS_TOL)
    if near is not None:
        raise AmbiguousReconstruction(
            f"ratio {x!r} is {resid:.2e} from {near}; input too noisy to decide")
    raise NoIntegerKernel(f"ratio {x!r} is not rational within denominator {MAX_DENOMINATOR}")


def integer_kernel(spec: ZonotopeSpec) -> KernelBasis:
    """Saturated integer basis (Hermite normal form) of the lattice Gamma(M, m) of integer
    vectors annihilating the last d - m columns of M^{-1}.

    Rational M: exact nullspace.  Float M: pick columns S with invertible
    B_S (B the constraint rows), rationalize R = B_S^{-1} B_J and take
    k_J = e_j, k_S = -R e_j.  A user kernel is validated instead.
    """
    d, m = spec.d, spec.m
    if spec.kernel is not None:
        K = spec.kernel
        if len(K) != m or any(len(k) != d for k in K) or exact.rank(K) != m:
            raise InvalidKernel(f"kernel must be {m} independent integer vectors of length {d}")
        res = annihilation_residual(spec, K)
        if res > KERNEL_RTOL:
            raise InvalidKernel(f"kernel violates the annihilation condition (residual {res:.2e})")
        return KernelBasis(tuple(K), "user", res)
    if spec.exact:
        inv = spec.inverse_exact
        rows = [exact.primitive_integer([inv[r][i] for r in range(d)]) for i in range(m, d)]
        K = tuple(tuple(r) for r in exact.hermite_normal_form(exact.integer_nullspace(rows, d)))
        return KernelBasis(K, "lemma42_exact", annihilation_residual(spec, K))
    b = _constraint_rows(spec)
    _, _, piv = linalg.qr(b, pivoting=True)
    s_cols = sorted(int(i) for i in piv[:d - m])
    j_cols = [c for c in range(d) if c not in s_cols]
    ratio = np.linalg.solve(b[:, s_cols], b[:, j_cols])
    rat = [[_rationalize_entry(float(x)) for x in row] for row in ratio]
    basis = []
    for jj, j in enumerate(j_cols):
        vec = [Fraction(0)] * d
        vec[j] = Fraction(1)
        for ss, s in enumerate(s_cols):
            vec[s] = -rat[ss][jj]
        basis.append(vec)
    K = _canonical_kernel(basis)
    res = annihilation_residual(spec, K)
    if res > KERNEL_RTOL:
        raise NoIntegerKernel(f"reconstructed kernel misses the condition by {res:.2e}")
    return KernelBasis(K, "lemma42_reconstructed", res)


def kernel_criterion(spec: ZonotopeSpec) -> tuple[list[int], np.ndarray]:
    """Column set S and ratio matrix B_S^{-1} B_J; an integer kernel of full
    rank exists iff the ratio matrix is rational."""
    b = _constraint_rows(spec)
    _, _, piv = linalg.qr(b, pivoting=True)
    s_cols = sorted(int(i) for i in piv[:spec.d - spec.m])
    j_cols = [c for c in range(spec.d) if c not in s_cols]
    return s_cols, np.linalg.solve(b[:, s_cols], b[:, j_cols])


# ---------------------------------------------------------------------------
# Lambda, U and densities


@dataclass(frozen=True)
class LambdaData:
    sigma: tuple[tuple, ...]  # rows sigma_i = A; Fractions on the exact path
    U: tuple[tuple, ...]
    sample: OrthoSet

    @property
    def A(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.sigma])


def sigma_rows(spec: ZonotopeSpec, K: KernelBasis) -> list[list]:
    if spec.exact:
        inv = spec.inverse_exact
        return [[sum((Fraction(k[r]) * inv[r][i] for r in range(spec.d)), Fraction(0))
                 for i in range(spec.m)] for k in K.K]
    return (K.array @ spec.inverse[:, :spec.m]).tolist()


def build_lambda(spec: ZonotopeSpec, K: KernelBasis, radius: int = 2) -> LambdaData:
    """Generators sigma_i, the matrix U and the points pi * alpha A for
    integer alpha with sup-norm <= radius (sup-norm then lexicographic)."""
    sigma = sigma_rows(spec, K)
    if spec.exact:
        dependent = exact.det(sigma) == 0
    else:
        a = np.asarray(sigma, dtype=float)
        dependent = abs(np.linalg.det(a)) <= 1e-12 * np.prod(np.linalg.norm(a, axis=1))
    if dependent:
        raise DependentSigmas("sigma vectors are dependent; the kernel fails the condition")
    u_rows = [list(k) for k in K.K] + [list(spec.matrix[i]) for i in range(spec.m, spec.d)]
    alphas = enumeration_order(spec.m, radius)
    a = np.array([[float(x) for x in r] for r in sigma])
    pts = math.pi * (alphas @ a)
    sample = OrthoSet(spec.m, pts, "thm25", math.pi, tuple(map(tuple, alphas.tolist())),
                      coverage=None, meta={"generators": (math.pi * a).tolist()})
    return LambdaData(tuple(map(tuple, sigma)), tuple(map(tuple, u_rows)), sample)


@dataclass(frozen=True)
class DensityBound:
    bound: float           # pi^{-m} |det M| / |det U|
    bound_printed: float   # pi^{-d} |det M| / |det U|
    lattice_density: float  # 1 / |det(pi A)|
    det_A: float
    det_A_direct: float
    det_U: float
    det_M: float
    exact_identity: bool | None  # |det A||det M| == |det U| in exact arithmetic
    exponent_flag: str = "printed bound uses pi^-d; the worked example matches pi^-m"

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def density_bound(spec: ZonotopeSpec, K: KernelBasis) -> DensityBound:
    sigma = sigma_rows(spec, K)
    u_rows = [list(k) for k in K.K] + [list(spec.matrix[i]) for i in range(spec.m, spec.d)]
    identity = None
    if spec.exact:
        det_u = exact.det(u_rows)
        if det_u == 0:
            raise SingularU("U is singular")
        det_m = exact.det(spec.matrix)
        det_a_direct = exact.det(sigma)
        identity = abs(det_a_direct) * abs(det_m) == abs(det_u)
        det_a = float(det_u / det_m)
        det_u, det_m, det_a_direct = float(det_u), float(det_m), float(det_a_direct)
    else:
        uf = np.array([[float(x) for x in r] for r in u_rows])
        det_u = float(np.linalg.det(uf))
        if abs(det_u) <= 1e-14 * max(1.0, np.abs(uf).max()) ** spec.d:
            raise SingularU("U is singular")
        det_m = float(np.linalg.det(spec.array))
        det_a = det_u / det_m
        det_a_direct = float(np.linalg.det(np.asarray(sigma, dtype=float)))
    m, d = spec.m, spec.d
    ratio = abs(det_m) / abs(det_u)
    return DensityBound(
        bound=math.pi ** -m * ratio,
        bound_printed=math.pi ** -d * ratio,
        lattice_density=1.0 / (math.pi ** m * abs(det_a_direct)),
        det_A=abs(det_a), det_A_direct=abs(det_a_direct), det_U=abs(det_u), det_M=abs(det_m),
        exact_identity=identity)


# ---------------------------------------------------------------------------
# lines through the cube


def interior_param(u: Sequence[float], v: Sequence[float]) -> float:
    """s with |u_i + s v_i| < 1 for all i: midpoint of the feasible interval."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    lo, hi = -math.inf, math.inf
    for ui, vi in zip(u, v):
        if vi == 0.0:
            if abs(ui) >= 1.0:
                raise NoIntersection("line is parallel to a face outside the cube")
            continue
        a, b = (-1.0 - ui) / vi, (1.0 - ui) / vi
        lo, hi = max(lo, min(a, b)), min(hi, max(a, b))
    if not lo < hi:
        raise NoIntersection("line misses the open cube")
    if math.isinf(lo) and math.isinf(hi):
        return 0.0
    return 0.5 * (lo + hi)


def line_cube_length(u: Sequence[float], v: Sequence[float]) -> float:
    """Chord length |t' - t''| |v| of {u + t v} in [-1, 1]^d, u interior."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(u) >= 1.0):
        raise NotInterior("base point is not strictly inside the cube")
    keep = v != 0.0
    if not keep.any():
        raise ValueError("direction must be nonzero")
    u, vk = u[keep], v[keep]
    ratios = np.concatenate([vk / (1.0 - u), -vk / (1.0 + u)])
    t_plus, t_minus = 1.0 / ratios.max(), 1.0 / ratios.min()
    return abs(t_plus - t_minus) * float(np.linalg.norm(v))


# ---------------------------------------------------------------------------
# weight function


def _fiber_system(spec: ZonotopeSpec, xs: np.ndarray):
    """Halfspaces G y <= h(x) describing the fiber {y : M^{-1}(x, y) in C_d}."""
    inv = spec.inverse
    v1, v2 = inv[:, :spec.m], inv[:, spec.m:]
    g = np.vstack([v2, -v2])
    base = xs @ v1.T
    h = np.hstack([1.0 - base, 1.0 + base])
    return g, h


def _shoelace(pts: np.ndarray, ok: np.ndarray) -> np.ndarray:
    """Areas of convex hulls of the feasible points in each batch row."""
    cnt = ok.sum(axis=1)
    safe = np.maximum(cnt, 1)[:, None]
    center = np.where(ok[..., None], pts, 0.0).sum(axis=1) / safe
    rel = pts - center[:, None, :]
    ang = np.where(ok, np.arctan2(rel[..., 1], rel[..., 0]), np.inf)
    order = np.argsort(ang, axis=1)
    srt = np.take_along_axis(pts, order[..., None], axis=1)
    ok_s = np.take_along_axis(ok, order, axis=1)
    srt = np.where(ok_s[..., None], srt, srt[:, :1, :])
    nxt = np.roll(srt, -1, axis=1)
    cross = srt[..., 0] * nxt[..., 1] - srt[..., 1] * nxt[..., 0]
    area = 0.5 * np.abs(cross.sum(axis=1))
    return np.where(cnt >= 3, area, 0.0)


def slice_volume(spec: ZonotopeSpec, xs: np.ndarray) -> np.ndarray:
    """(d-m)-volume of the fiber of M C_d over each row of ``xs``."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    g, h = _fiber_system(spec, xs)
    k = spec.d - spec.m
    if k == 1:
        col = g[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            bounds = h / col
        upper = np.where(col > 0, bounds, np.inf).min(axis=1)
        lower = np.where(col < 0, bounds, -np.inf).max(axis=1)
        empty = np.any((col == 0) & (h < 0), axis=1)
        return np.where(empty, 0.0, np.maximum(0.0, upper - lower))
    subsets = list(itertools.combinations(range(len(g)), k))
    if len(subsets) > MAX_VERTEX_SUBSETS:
        return np.array([_fiber_volume_lp(g, hh) for hh in h])
    mats = np.array([g[list(s)] for s in subsets])
    dets = np.linalg.det(mats)
    good = np.abs(dets) > 1e-12
    subsets = [s for s, ok in zip(subsets, good) if ok]
    invs = np.linalg.inv(mats[good])
    idx = np.array(subsets)
    rhs = h[:, idx]  # (P, S, k)
    verts = np.einsum("sij,psj->psi", invs, rhs)
    slack = np.einsum("ci,psi->psc", g, verts) - h[:, None, :]
    feasible = np.all(slack <= FEASIBLE_TOL * (1.0 + np.abs(h))[:, None, :], axis=2)
    if k == 2:
        return _shoelace(verts, feasible)
    out = np.zeros(len(xs))
    for p in range(len(xs)):
        pts = verts[p][feasible[p]]
        if len(pts) > k:
            try:
                out[p] = ConvexHull(pts).volume
            except QhullError:
                out[p] = 0.0
    return out


def _fiber_volume_lp(g: np.ndarray, h: np.ndarray) -> float:
    norms = np.linalg.norm(g, axis=1)
    k = g.shape[1]
    res = optimize.linprog(np.r_[np.zeros(k), -1.0], A_ub=np.c_[g, norms], b_ub=h,
                           bounds=[(None, None)] * k + [(0, None)], method="highs")
    if res.status != 0 or res.x[-1] <= 1e-12:
        return 0.0
    hs = HalfspaceIntersection(np.c_[g, -h], res.x[:k])
    return float(ConvexHull(hs.intersections).volume)


def line_length_weight(spec: ZonotopeSpec, xs: np.ndarray) -> np.ndarray:
    """W for m = d - 1 and orthogonal M from the chord of u + t v."""
    if spec.m != spec.d - 1 or not spec.is_orthogonal():
        raise MethodUnavailable("line_length needs m = d - 1 and orthogonal M")
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    mt = spec.array.T
    v = mt[:, -1]
    out = np.zeros(len(xs))
    for i, x in enumerate(xs):
        u = mt[:, :-1] @ x
        try:
            s = interior_param(u, v)
        except NoIntersection:
            continue
        out[i] = line_cube_length(u + s * v, v)
    return out


def fourier_slice_weight(spec: ZonotopeSpec, x1: float) -> float:
    """W(x1) for m = 1 and orthogonal M from the sinc-product integral.

    The integrand is even in lambda; [0, L] uses fixed 40-point
    Gauss-Legendre panels of unit length and [L, inf) expands the sine
    product into exponentials integrated against lambda^-n by QAWF.
    """
    if spec.m != 1 or not spec.is_orthogonal():
        raise MethodUnavailable("fourier_slice needs m = 1 and orthogonal M")
    a = spec.array[0]
    nz = a[a != 0.0]
    zero_factor = 2.0 ** (len(a) - len(nz))
    nodes, weights = np.polynomial.legendre.leggauss(40)
    panels = np.arange(int(FOURIER_CUTOFF))
    lam = (panels[:, None] + 0.5 * (nodes[None, :] + 1.0)).ravel()
    wts = np.tile(0.5 * weights, len(panels))
    vals = np.prod(2.0 * np.sinc(2.0 * np.outer(lam, nz)), axis=1) * np.cos(2 * np.pi * lam * x1)
    head = float(np.sum(wts * vals))
    n = len(nz)
    coeff = 1.0 / (np.pi ** n * np.prod(nz))
    tail = 0.0
    cache: dict[tuple[str, float], float] = {}
    for eps in itertools.product((-1.0, 1.0), repeat=n):
        sign = np.prod(eps)
        for eta in (-1.0, 1.0):
            beta = 2 * np.pi * (float(np.dot(eps, nz)) + eta * x1)
            # (2i)^{-n} sign e^{i beta lam} / 2, real part
            phase = (-1j / 2) ** n * sign / 2
            c_int = _tail_integral("cos", beta, n, cache)
            s_int = _tail_integral("sin", beta, n, cache)
            tail += float((phase * (c_int + 1j * s_int)).real)
    return zero_factor * 2.0 * (head + coeff * tail)


def _tail_integral(kind: str, beta: float, n: int, cache: dict) -> float:
    """int_L^inf trig(beta t) / t^n dt."""
    key = (kind, round(beta, 14))
    if key in cache:
        return cache[key]
    L = FOURIER_CUTOFF
    if abs(beta) < 1e-14:
        val = 0.0 if kind == "sin" else (L ** (1 - n) / (n - 1) if n > 1 else 0.0)
    else:
        sgn = 1.0 if (kind == "cos" or beta > 0) else -1.0
        val = sgn * integrate.quad(lambda t: t ** -n, L, np.inf, weight=kind,
                                   wvar=abs(beta), epsabs=1e-14, limlst=200)[0]
    cache[key] = val
    return val


def fiber_box(spec: ZonotopeSpec) -> np.ndarray:
    """Half-widths of the box containing every fiber: sum_i |M_{j,i}|, j > m."""
    return np.abs(spec.array[spec.m:]).sum(axis=1)


def monte_carlo_weight(spec: ZonotopeSpec, xs: np.ndarray, samples: int = 10**6,
                       seed: int = 0) -> np.ndarray:
    """W by stratified (jittered) sampling of the fiber bounding box."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    k = spec.d - spec.m
    half = fiber_box(spec)
    per_axis = max(1, int(round(samples ** (1.0 / k))))
    rng = np.random.default_rng(seed)
    grid = np.stack(np.meshgrid(*([np.arange(per_axis)] * k), indexing="ij"), -1).reshape(-1, k)
    box_vol = float(np.prod(2 * half))
    inv = spec.inverse
    out = np.empty(len(xs))
    for i, x in enumerate(xs):
        ys = (grid + rng.random(grid.shape)) / per_axis * (2 * half) - half
        pts = inv[:, :spec.m] @ x
        inside = np.all(np.abs(ys @ inv[:, spec.m:].T + pts) <= 1.0, axis=1)
        out[i] = box_vol * inside.mean()
    return out


@dataclass(frozen=True)
class WeightEvaluator:
    spec: ZonotopeSpec
    method: WeightMethod = "slice_polytope"
    samples: int = 10**6
    seed: int = 0

    def __post_init__(self):
        if self.method == "line_length" and (self.spec.m != self.spec.d - 1
                                             or not self.spec.is_orthogonal()):
            raise MethodUnavailable("line_length needs m = d - 1 and orthogonal M")
        if self.method == "fourier_slice" and (self.spec.m != 1 or not self.spec.is_orthogonal()):
            raise MethodUnavailable("fourier_slice needs m = 1 and orthogonal M")
        if self.method not in ("slice_polytope", "line_length", "fourier_slice", "monte_carlo"):
            raise MethodUnavailable(f"unknown weight method {self.method!r}")

    def batch(self, xs) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if xs.shape[1] != self.spec.m:
            raise ValueError(f"points must have {self.spec.m} coordinates")
        if self.method == "slice_polytope":
            return slice_volume(self.spec, xs)
        if self.method == "line_length":
            return line_length_weight(self.spec, xs)
        if self.method == "monte_carlo":
            return monte_carlo_weight(self.spec, xs, self.samples, self.seed)
        return np.array([fourier_slice_weight(self.spec, float(x[0])) for x in xs])

    def __call__(self, x) -> float:
        return float(self.batch(np.asarray(x, dtype=float)[None, :])[0])


def weight_eval(evaluator: WeightEvaluator, x) -> float:
    return evaluator(x)


# ---------------------------------------------------------------------------
# weighted orthogonality


def weight_walls(spec: ZonotopeSpec) -> list[tuple[np.ndarray, float]]:
    """Hyperplanes carrying the projected (m-1)-faces of M C_d.

    W is a polynomial of degree d - m on each cell of this arrangement.
    """
    d, m = spec.d, spec.m
    gens = spec.array[:m].T  # projected generators, one per row
    seen: dict[tuple, tuple[np.ndarray, float]] = {}
    for tset in itertools.combinations(range(d), m - 1):
        if m == 1:
            normal = np.array([1.0])
        else:
            sub = gens[list(tset)]
            _, sv, vt = np.linalg.svd(sub)
            if sv.min() <= 1e-12 * max(1.0, sv.max()):
                continue
            normal = vt[-1]
        normal = normal / np.linalg.norm(normal)
        lead = np.flatnonzero(np.abs(normal) > 1e-12)[0]
        if normal[lead] < 0:
            normal = -normal
        rest = [c for c in range(d) if c not in tset]
        proj = gens[rest] @ normal
        for signs in itertools.product((-1.0, 1.0), repeat=len(rest)):
            off = float(np.dot(signs, proj))
            key = tuple(np.round(normal, 9)) + (round(off, 9),)
            seen.setdefault(key, (normal, off))
    return list(seen.values())


def _split(cell: np.ndarray, normal: np.ndarray, off: float, tol: float):
    s = cell @ normal - off
    if s.max() <= tol or s.min() >= -tol:
        return [cell]
    pos, neg = s > tol, s < -tol
    on = ~(pos | neg)
    p, q = cell[pos], cell[neg]
    sp, sq = s[pos], s[neg]
    frac = sp[:, None] / (sp[:, None] - sq[None, :])
    cross = (p[:, None, :] + frac[..., None] * (q[None, :, :] - p[:, None, :])).reshape(-1, cell.shape[1])
    parts = []
    for side in (pos, neg):
        pts = np.vstack([cell[side], cell[on], cross])
        reduced = _hull_vertices(pts)
        if reduced is not None:
            parts.append(reduced)
    return parts


def _hull_vertices(pts: np.ndarray) -> np.ndarray | None:
    if pts.shape[1] == 1:
        lo, hi = pts.min(), pts.max()
        return None if hi - lo <= 1e-12 else np.array([[lo], [hi]])
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return None
    if hull.volume <= 1e-14:
        return None
    return pts[hull.vertices]


def _multi_indices(parts: int, total: int) -> list[tuple[int, ...]]:
    return [c for c in itertools.product(range(total + 1), repeat=parts) if sum(c) == total]


@dataclass
class WeightedQuadrature:
    """Exact-in-form integration of e^{i<lam, x>} W(x) over the projection.

    The projection is cut along ``weight_walls`` and each cell triangulated.
    On a simplex W is a polynomial of degree k = d - m, recovered in the
    barycentric monomial basis t^beta (|beta| = k) from W at a shrunk
    principal lattice.  Then
        int_simplex e^{<z, t>} t^beta = |det| beta! exp[z_j repeated beta_j + 1],
    the grouped Hermite-Genocchi identity, evaluated by divided differences.
    """

    spec: ZonotopeSpec
    simplices: np.ndarray = field(init=False)
    coeffs: np.ndarray = field(init=False)
    fit_residual: float = field(init=False)
    betas: list = field(init=False)

    def __post_init__(self):
        spec = self.spec
        m, k = spec.m, spec.d - spec.m
        zono = project_zonotope(spec.matrix, m)
        scale = float(np.abs(zono.points).max())
        cells = [zono.points]
        for normal, off in weight_walls(spec):
            nxt = []
            for c in cells:
                nxt.extend(_split(c, normal, off, 1e-10 * scale))
            cells = nxt
        simplices = []
        for c in cells:
            if m == 1:
                simplices.append(c)
                continue
            tri = Delaunay(c)
            for s in tri.simplices:
                vol = abs(np.linalg.det(c[s[1:]] - c[s[0]]))
                if vol > 1e-14 * scale ** m:
                    simplices.append(c[s])
        self.simplices = np.array(simplices)  # (S, m+1, m)
        self.betas = _multi_indices(m + 1, k)
        delta = 0.5
        bary = (np.array(self.betas, dtype=float) + delta) / (k + (m + 1) * delta)
        design = np.prod(bary[:, None, :] ** np.array(self.betas, dtype=float)[None, :, :], axis=2)
        pts = np.einsum("pj,sjc->spc", bary, self.simplices)
        vals = slice_volume(spec, pts.reshape(-1, m)).reshape(len(self.simplices), len(bary))
        self.coeffs = np.linalg.solve(design, vals.T).T  # (S, n_beta)
        # check the fit at each centroid
        center = np.full(m + 1, 1.0 / (m + 1))
        mono = np.prod(center[None, :] ** np.array(self.betas, dtype=float), axis=1)
        fitted = self.coeffs @ mono
        actual = slice_volume(spec, self.simplices.mean(axis=1))
        self.fit_residual = float(np.abs(fitted - actual).max())
        edges = self.simplices[:, 1:, :] - self.simplices[:, :1, :]
        self._absdet = np.abs(np.linalg.det(edges)) if m > 1 else np.abs(edges[:, 0, 0])
        self._fact = np.array([math.prod(math.factorial(b) for b in beta) for beta in self.betas],
                              dtype=float)
        reps = [np.repeat(np.arange(m + 1), np.array(beta) + 1) for beta in self.betas]
        self._reps = np.array(reps)  # (n_beta, d + 1) vertex index per node

    def integral(self, lam: Sequence[float]) -> complex:
        lam = np.asarray(lam, dtype=float)
        z = 1j * (self.simplices @ lam)  # (S, m+1)
        nodes = z[:, self._reps]  # (S, n_beta, d+1)
        dd = exp_divided_difference(nodes.reshape(-1, nodes.shape[-1])).reshape(nodes.shape[:2])
        return complex(np.sum(self._absdet[:, None] * self.coeffs * self._fact[None, :] * dd))

    @property
    def mass(self) -> float:
        return self.integral(np.zeros(self.spec.m)).real


@dataclass(frozen=True)
class WeightedResidual:
    lam: tuple[float, ...]
    alpha: tuple[int, ...]
    k_bar: tuple[int, ...]
    cube_value: float       # route (a): |int_{C_d} e^{i pi <x, k>} dx|
    projected_value: float  # route (b): |int e^{i<lam,x>} W(x) dx|
    w_mass: float
    expected_mass: float
    fit_residual: float

    @property
    def relative(self) -> float:
        return self.projected_value / self.w_mass

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["relative"] = self.relative
        return out


def lambda_coefficients(spec: ZonotopeSpec, K: KernelBasis, lam: Sequence[float]) -> tuple[int, ...]:
    """Integer alpha with lam = pi alpha A, or LambdaNotInSet."""
    a = np.array([[float(x) for x in r] for r in sigma_rows(spec, K)])
    alpha = np.linalg.solve(a.T, np.asarray(lam, dtype=float) / math.pi)
    rounded = np.rint(alpha)
    if np.abs(alpha - rounded).max() > 1e-8 * max(1.0, np.abs(alpha).max()):
        raise LambdaNotInSet(f"{list(lam)} is not an integer combination of pi sigma_i")
    return tuple(int(x) for x in rounded)


def weighted_orthogonality_check(spec: ZonotopeSpec, K: KernelBasis, lam: Sequence[float],
                                 quadrature: WeightedQuadrature | None = None) -> WeightedResidual:
    alpha = lambda_coefficients(spec, K, lam)
    if not any(alpha):
        raise LambdaNotInSet("the origin is excluded")
    k_bar = tuple(int(x) for x in np.array(alpha) @ np.array(K.K))
    cube = float(abs(np.prod(2.0 * np.sinc(np.array(k_bar, dtype=float)))))
    quad = quadrature or WeightedQuadrature(spec)
    return WeightedResidual(
        lam=tuple(float(x) for x in lam), alpha=alpha, k_bar=k_bar, cube_value=cube,
        projected_value=abs(quad.integral(lam)), w_mass=quad.mass,
        expected_mass=spec.abs_det * 2.0 ** spec.d, fit_residual=quad.fit_residual)
