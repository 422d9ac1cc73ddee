"""Fourier transform of a polytope's indicator function.

Two independent routes:

* ``fourier_lawrence`` sums vertex terms D_v(w) exp(-i<v, w>) over a simple
  polytope; it is only valid off the hyperplanes orthogonal to edges.
* ``fourier_oracle`` triangulates the polytope and integrates the exponential
  over every simplex in closed form (divided differences of exp), which works
  for any convex polytope and any frequency.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import NotSimple, SingularFrequency
from .geometry import Polytope, edge_fan, is_simple

SINGULAR_RTOL = 1e-12
CONFLUENCE_GAP = 0.1

Method = Literal["lawrence", "oracle"]


@dataclass(frozen=True)
class FourierValue:
    value: complex
    method: Method
    singular_flag: bool

    def __post_init__(self):
        if self.singular_flag and self.method == "lawrence":
            raise ValueError("the vertex formula is undefined on the singular set")

    def __abs__(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class MomentResult:
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs) / max(1.0, abs(self.lhs))


@dataclass(frozen=True)
class CompanionSum:
    value: float
    mass: float  # sum of |<v,w>|^j |D_v(w)|, the scale of the cancellation

    @property
    def relative(self) -> float:
        return abs(self.value) / self.mass if self.mass > 0 else abs(self.value)


class _FanData:
    """Per-vertex edge fans as float arrays, computed once per polytope."""

    def __init__(self, poly: Polytope):
        if not is_simple(poly):
            raise NotSimple("vertex formula requires a simple polytope")
        self.vertices = poly.points
        self.fans = np.array([[[float(x) for x in vec] for vec in edge_fan(poly, v).vectors]
                              for v in range(poly.n_vertices)])
        self.dets = np.array([abs(float(edge_fan(poly, v).determinant))
                              for v in range(poly.n_vertices)])
        self.norms = np.linalg.norm(self.fans, axis=2)
        self.neighbors = poly.adjacency


_fan_cache: "weakref.WeakKeyDictionary[Polytope, _FanData]" = weakref.WeakKeyDictionary()


def _fan_data(poly: Polytope) -> _FanData:
    data = _fan_cache.get(poly)
    if data is None:
        data = _FanData(poly)
        _fan_cache[poly] = data
    return data


def _as_omega(poly: Polytope, omega: Sequence[float]) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if w.shape != (poly.dim,):
        raise ValueError(f"frequency must have length {poly.dim}")
    if not np.all(np.isfinite(w)):
        raise ValueError("frequency must be finite")
    return w


def singular_edge(poly: Polytope, omega: Sequence[float]) -> tuple[int, int] | None:
    """First edge (i, j) with |<v_j - v_i, w>| < 1e-12 |v_j - v_i| |w|, if any."""
    w = _as_omega(poly, omega)
    wn = np.linalg.norm(w)
    pts = poly.points
    for i, j in poly.edges:
        xi = pts[j] - pts[i]
        if abs(xi @ w) < SINGULAR_RTOL * np.linalg.norm(xi) * wn or wn == 0.0:
            return (i, j)
    return None


def _denominators(poly: Polytope, w: np.ndarray) -> np.ndarray:
    data = _fan_data(poly)
    dots = data.fans @ w  # (n_vertices, d)
    bad = np.abs(dots) < SINGULAR_RTOL * data.norms * np.linalg.norm(w)
    if np.linalg.norm(w) == 0.0 or bad.any():
        v, k = (0, 0) if not bad.any() else map(int, np.argwhere(bad)[0])
        edge = (v, data.neighbors[v][k])
        raise SingularFrequency(f"frequency {w.tolist()} is orthogonal to edge {edge}", edge)
    return dots


def d_v(poly: Polytope, v: int, omega: Sequence[float]) -> float:
    """Vertex weight |det(xi_1..xi_d)| / prod <xi_i, w>."""
    w = _as_omega(poly, omega)
    data = _fan_data(poly)
    dots = _denominators(poly, w)
    return float(data.dets[v] / np.prod(dots[v]))


def _all_d_v(poly: Polytope, w: np.ndarray) -> np.ndarray:
    data = _fan_data(poly)
    dots = _denominators(poly, w)
    return data.dets / np.prod(dots, axis=1)


def fourier_lawrence(poly: Polytope, omega: Sequence[float]) -> FourierValue:
    w = _as_omega(poly, omega)
    dv = _all_d_v(poly, w)
    phases = np.exp(-1j * (poly.points @ w))
    value = (1j ** (-poly.dim)) * np.sum(dv * phases)
    return FourierValue(complex(value), "lawrence", False)


# ---------------------------------------------------------------------------
# simplex route


def _newton_dd(z: np.ndarray) -> np.ndarray:
    """Divided differences exp[z_0..z_n] row-wise by the Newton recurrence."""
    c = np.exp(z)
    n = z.shape[1] - 1
    for k in range(1, n + 1):
        c[:, k:] = (c[:, k:] - c[:, k - 1:n]) / (z[:, k:] - z[:, :n + 1 - k])
    return c[:, n]


def _taylor_dd(z: np.ndarray) -> np.ndarray:
    """exp[z_0..z_n] row-wise as the corner entry of exp(J), J = diag(z) + shift.

    The matrix exponential is evaluated by a truncated Taylor series on
    J / 2^s followed by s squarings (s per row); confluent nodes need no
    special care.
    """
    rows, n1 = z.shape
    n = n1 - 1
    center = z.mean(axis=1)
    w = z - center[:, None]
    jm = np.zeros((rows, n1, n1), dtype=complex)
    idx = np.arange(n1)
    jm[:, idx, idx] = w
    jm[:, idx[:-1], idx[1:]] = 1.0
    norm = np.abs(w).max(axis=1) + 1.0
    s = np.maximum(0, np.ceil(np.log2(norm / 0.5))).astype(int)
    a = jm / (2.0 ** s)[:, None, None]
    term = np.broadcast_to(np.eye(n1, dtype=complex), a.shape).copy()
    acc = term.copy()
    for k in range(1, 40):
        term = term @ a / k
        acc += term
        if np.abs(term).max() < 1e-19:
            break
    for step in range(int(s.max(initial=0))):
        live = s > step
        acc[live] = acc[live] @ acc[live]
    return np.exp(center) * acc[:, 0, n]


def exp_divided_difference(nodes: np.ndarray, confluence_gap: float = CONFLUENCE_GAP) -> np.ndarray:
    """Divided differences of exp over rows of ``nodes`` (shape (k, n+1)).

    Rows whose nodes are pairwise at least ``confluence_gap`` apart use the
    Newton recurrence; the rest use the scaled Taylor path.
    """
    z = np.atleast_2d(np.asarray(nodes, dtype=complex))
    n = z.shape[1]
    if n == 1:
        return np.exp(z[:, 0])
    gaps = np.where(np.eye(n, dtype=bool), np.inf, np.abs(z[:, :, None] - z[:, None, :]))
    separated = gaps.min(axis=(1, 2)) >= confluence_gap
    out = np.empty(z.shape[0], dtype=complex)
    if separated.any():
        out[separated] = _newton_dd(z[separated].copy())
    if not separated.all():
        out[~separated] = _taylor_dd(z[~separated])
    return out


class _SimplexData:
    def __init__(self, poly: Polytope):
        pts = poly.points
        simplices = np.array(poly.triangulation, dtype=int)
        self.corners = pts[simplices]  # (S, d+1, d)
        edges = self.corners[:, 1:, :] - self.corners[:, :1, :]
        self.absdet = np.abs(np.linalg.det(edges))


_simplex_cache: "weakref.WeakKeyDictionary[Polytope, _SimplexData]" = weakref.WeakKeyDictionary()


def _simplex_data(poly: Polytope) -> _SimplexData:
    data = _simplex_cache.get(poly)
    if data is None:
        data = _SimplexData(poly)
        _simplex_cache[poly] = data
    return data


def fourier_oracle(poly: Polytope, omega: Sequence[float]) -> FourierValue:
    """F_P(w) by exact simplex integration over the pulling triangulation."""
    w = _as_omega(poly, omega)
    if not np.any(w):
        return FourierValue(complex(float(poly.volume)), "oracle", False)
    data = _simplex_data(poly)
    nodes = -1j * (data.corners @ w)
    value = np.sum(data.absdet * exp_divided_difference(nodes))
    return FourierValue(complex(value), "oracle", singular_edge(poly, w) is not None)


def fourier_oracle_batch(poly: Polytope, omegas: np.ndarray) -> np.ndarray:
    """Oracle values at each row of ``omegas``."""
    w = np.atleast_2d(np.asarray(omegas, dtype=float))
    if w.shape[1] != poly.dim:
        raise ValueError(f"frequencies must have length {poly.dim}")
    data = _simplex_data(poly)
    out = np.empty(len(w), dtype=complex)
    zero = ~np.any(w, axis=1)
    out[zero] = float(poly.volume)
    if (~zero).any():
        nodes = -1j * np.einsum("sjc,wc->wsj", data.corners, w[~zero])
        dd = exp_divided_difference(nodes.reshape(-1, nodes.shape[-1])).reshape(nodes.shape[:2])
        out[~zero] = dd @ data.absdet
    return out


def _complete_homogeneous(x: np.ndarray, j: int) -> np.ndarray:
    """h_j over each row of x (shape (S, n))."""
    h = np.zeros((x.shape[0], j + 1))
    h[:, 0] = 1.0
    for col in range(x.shape[1]):
        for k in range(1, j + 1):
            h[:, k] += x[:, col] * h[:, k - 1]
    return h[:, j]


def moment(poly: Polytope, omega: Sequence[float], j: int) -> MomentResult:
    """Both sides of the vertex moment formula for int_P <x, w>^j dx.

    The left side integrates over the triangulation using the exact simplex
    rule |det| j! / (j+d)! h_j(<v_0,w>, ..., <v_d,w>); the right side is the
    vertex sum with weights D_v.
    """
    if j < 0:
        raise ValueError("moment order must be nonnegative")
    w = _as_omega(poly, omega)
    d = poly.dim
    sdata = _simplex_data(poly)
    proj = sdata.corners @ w
    lhs = float(np.sum(sdata.absdet * _complete_homogeneous(proj, j))
                * math.factorial(j) / math.factorial(j + d))
    dv = _all_d_v(poly, w)
    rhs = float(math.factorial(j) * (-1) ** d / math.factorial(j + d)
                * np.sum((poly.points @ w) ** (j + d) * dv))
    return MomentResult(lhs, rhs)


def companion_sum(poly: Polytope, omega: Sequence[float], j: int) -> CompanionSum:
    """sum_v <v, w>^j D_v(w), which vanishes for 0 <= j <= d - 1."""
    if not 0 <= j <= poly.dim - 1:
        raise ValueError(f"companion identity holds for 0 <= j <= {poly.dim - 1}")
    w = _as_omega(poly, omega)
    dv = _all_d_v(poly, w)
    terms = (poly.points @ w) ** j * dv
    return CompanionSum(float(np.sum(terms)), float(np.sum(np.abs(terms))))


def is_fourier_zero(poly: Polytope, omega: Sequence[float], tol: float = 1e-8) -> bool:
    return abs(fourier_oracle(poly, omega).value) <= tol * float(poly.volume)


def fourier(poly: Polytope, omega: Sequence[float], method: Method | None = None) -> FourierValue:
    """Vertex formula where it applies, oracle otherwise (or as requested)."""
    if method == "oracle":
        return fourier_oracle(poly, omega)
    if method == "lawrence":
        return fourier_lawrence(poly, omega)
    if is_simple(poly) and singular_edge(poly, omega) is None:
        return fourier_lawrence(poly, omega)
    return fourier_oracle(poly, omega)
