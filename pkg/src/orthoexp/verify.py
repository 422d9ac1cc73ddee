"""Independent checks: pairwise orthogonality through the simplex oracle and
box-count density estimates over a grid of anchors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constructions import OrthoSet
from .errors import SourceTooSmall
from .fourier import fourier_oracle_batch
from .geometry import Polytope
from .zonotope import KernelBasis, WeightedQuadrature, ZonotopeSpec, sigma_rows

ANCHOR_STEPS = 8


@dataclass(frozen=True)
class VerificationReport:
    pair_count: int
    max_residual: float
    failing_pairs: tuple[tuple[int, int, float], ...]
    tol: float
    weighted: bool = False

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def to_dict(self) -> dict:
        return {"pair_count": self.pair_count, "max_residual": self.max_residual,
                "failing_pairs": [list(p) for p in self.failing_pairs], "tol": self.tol,
                "weighted": self.weighted, "passed": self.passed}


def _points(source: OrthoSet | np.ndarray) -> np.ndarray:
    if isinstance(source, OrthoSet):
        return np.asarray(source.points, dtype=float)
    return np.atleast_2d(np.asarray(source, dtype=float))


def _pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def orthogonality_report(poly: Polytope, points: OrthoSet | np.ndarray,
                         tol: float = 1e-8, chunk: int = 4096) -> VerificationReport:
    """|F_P(l - l')| / |P| for every unordered pair (F(-w) is conj F(w))."""
    pts = _points(points)
    i, j = _pairs(len(pts))
    vol = float(poly.volume)
    res = np.empty(len(i))
    for start in range(0, len(i), chunk):
        sl = slice(start, start + chunk)
        res[sl] = np.abs(fourier_oracle_batch(poly, pts[i[sl]] - pts[j[sl]])) / vol
    bad = np.flatnonzero(res > tol)
    return VerificationReport(
        len(i), float(res.max(initial=0.0)),
        tuple((int(i[b]), int(j[b]), float(res[b])) for b in bad), tol)


def weighted_orthogonality_report(spec: ZonotopeSpec, points: OrthoSet | np.ndarray,
                                  tol: float = 1e-6,
                                  quadrature: WeightedQuadrature | None = None) -> VerificationReport:
    """Pairwise |int e^{i<l - l', x>} W(x) dx| relative to int W."""
    pts = _points(points)
    quad = quadrature or WeightedQuadrature(spec)
    mass = quad.mass
    i, j = _pairs(len(pts))
    res = np.array([abs(quad.integral(pts[a] - pts[b])) / mass for a, b in zip(i, j)])
    bad = np.flatnonzero(res > tol)
    return VerificationReport(
        len(i), float(res.max(initial=0.0)),
        tuple((int(i[b]), int(j[b]), float(res[b])) for b in bad), tol, weighted=True)


@dataclass(frozen=True)
class DensityEstimate:
    rhos: tuple[float, ...]
    sup_counts: tuple[int, ...]
    inf_counts: tuple[int, ...]
    dim: int
    reference: float | None = None  # 1 / |det B| for lattices
    landau: float | None = None     # |P| / (2 pi)^d when a polytope is given
    meta: dict = field(default_factory=dict)

    @property
    def sup_ratios(self) -> list[float]:
        return [c / r ** self.dim for c, r in zip(self.sup_counts, self.rhos)]

    @property
    def inf_ratios(self) -> list[float]:
        return [c / r ** self.dim for c, r in zip(self.inf_counts, self.rhos)]

    def rows(self) -> list[dict]:
        return [{"rho": r, "sup_count": s, "inf_count": i, "sup_ratio": sr, "inf_ratio": ir}
                for r, s, i, sr, ir in zip(self.rhos, self.sup_counts, self.inf_counts,
                                           self.sup_ratios, self.inf_ratios)]

    def to_dict(self) -> dict:
        return {"dim": self.dim, "rows": self.rows(), "reference": self.reference,
                "landau": self.landau, **self.meta}


def lattice_points(generators: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """All integer combinations of the rows of ``generators`` inside [lo, hi]^d."""
    b = np.asarray(generators, dtype=float)
    d = b.shape[0]
    inv = np.linalg.inv(b)
    corners = np.array(np.meshgrid(*([[lo, hi]] * d), indexing="ij")).reshape(d, -1).T
    coeff = corners @ inv
    ranges = [np.arange(math.floor(coeff[:, c].min()) - 1, math.ceil(coeff[:, c].max()) + 2)
              for c in range(d)]
    alphas = np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, d)
    pts = alphas @ b
    keep = np.all((pts >= lo) & (pts <= hi), axis=1)
    return pts[keep]


def density_estimate(rhos: Sequence[float], points: OrthoSet | np.ndarray | None = None,
                     generators: np.ndarray | None = None, coverage: float | None = None,
                     polytope: Polytope | None = None) -> DensityEstimate:
    """sup/inf over anchors x of |Lambda cap (x + [0, rho)^d)|.

    Anchors form a grid of pitch rho / 8 in [-rho, rho]^d, so every box lies
    inside [-rho, 2 rho)^d; a point source must be complete there (its
    ``coverage`` sup-norm radius at least 2 rho).
    """
    if (points is None) == (generators is None):
        raise ValueError("give exactly one of points or generators")
    rhos = tuple(float(r) for r in rhos)
    if generators is not None:
        gens = np.atleast_2d(np.asarray(generators, dtype=float))
        d = gens.shape[1]
        reference = 1.0 / abs(np.linalg.det(gens))
        pts = lattice_points(gens, -max(rhos), 2 * max(rhos))
    else:
        pts = _points(points)
        d = pts.shape[1]
        reference = None
        cov = coverage
        if cov is None and isinstance(points, OrthoSet):
            cov = points.coverage
        if cov is None:
            raise SourceTooSmall("point source has unknown coverage; pass coverage=")
        if cov < 2 * max(rhos):
            raise SourceTooSmall(f"points are complete only to sup-norm {cov:.6g}, "
                                 f"need {2 * max(rhos):.6g}")
    sup_counts, inf_counts = [], []
    for rho in rhos:
        counts = _window_counts(pts, rho, d)
        sup_counts.append(int(counts.max()))
        inf_counts.append(int(counts.min()))
    landau = float(polytope.volume) / (2 * math.pi) ** d if polytope is not None else None
    return DensityEstimate(rhos, tuple(sup_counts), tuple(inf_counts), d, reference, landau)


def _window_counts(pts: np.ndarray, rho: float, d: int) -> np.ndarray:
    """Counts in x + [0, rho)^d for every anchor x on the grid of pitch rho/8.

    Each box is a union of 8^d half-open grid cells, so one histogram over
    [-rho, 2 rho) and a cumulative-sum window give every count at once.
    """
    cells = 3 * ANCHOR_STEPS
    edges = np.linspace(-rho, 2 * rho, cells + 1)
    idx = np.stack([np.searchsorted(edges, pts[:, c], side="right") - 1 for c in range(d)], 1)
    keep = np.all((idx >= 0) & (idx < cells), axis=1)
    hist = np.zeros((cells,) * d, dtype=np.int64)
    np.add.at(hist, tuple(idx[keep].T), 1)
    acc = hist
    for axis in range(d):
        acc = np.cumsum(acc, axis=axis)
        acc = np.concatenate([np.zeros_like(acc.take([0], axis=axis)), acc], axis=axis)
        hi = acc.take(range(ANCHOR_STEPS, ANCHOR_STEPS + 2 * ANCHOR_STEPS + 1), axis=axis)
        lo = acc.take(range(0, 2 * ANCHOR_STEPS + 1), axis=axis)
        acc = hi - lo
    return acc.ravel()


def sigma_generators(spec: ZonotopeSpec, K: KernelBasis) -> np.ndarray:
    """Basis pi * sigma_i of the lattice pi Lambda'."""
    return math.pi * np.array([[float(x) for x in r] for r in sigma_rows(spec, K)])
