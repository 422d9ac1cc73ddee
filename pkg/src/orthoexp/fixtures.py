"""Worked examples: the Fig. 1 quadrilateral, the orthogonal 3x3 family
(p, q) projected to the plane, and the Vandermonde 5x5 projection to R^3."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from . import exact
from .geometry import Polytope, hull_from_vertices
from .zonotope import ZonotopeSpec

F = Fraction


def fig1_polygon() -> Polytope:
    return hull_from_vertices([(-1, 0), (1, 0), (-2, 1), (2, 1)])


def triangle() -> Polytope:
    return hull_from_vertices([(0, 0), (1, 0), (2, 1)])


def cube(d: int) -> Polytope:
    return hull_from_vertices(list(itertools.product((-1, 1), repeat=d)))


# ---------------------------------------------------------------------------
# orthogonal family


def ex32_matrix(p: int, q: int) -> list[list[float]]:
    if p < 1 or q < 1 or math.gcd(p, q) != 1:
        raise ValueError("p and q must be coprime positive integers")
    delta = math.sqrt(q * q + 2 * p * p)
    r2 = math.sqrt(2.0)
    rows = [[q / r2, q / r2, r2 * p],
            [-delta / r2, delta / r2, 0.0],
            [-p, -p, q]]
    return [[x / delta for x in r] for r in rows]


def ex32_spec(p: int = 1, q: int = 1) -> ZonotopeSpec:
    return ZonotopeSpec(tuple(tuple(r) for r in ex32_matrix(p, q)), 2)


def ex32_density(p: int, q: int) -> float:
    return math.pi ** -2 / math.sqrt(q * q + 2 * p * p)


def ex32_hexagon(p: int, q: int) -> np.ndarray:
    """Vertices of P_{p,q} (the projection is sqrt(2) times this)."""
    delta = math.sqrt(q * q + 2 * p * p)
    half = [((p + q) / delta, 0.0), (p / delta, 1.0), (p / delta, -1.0)]
    return np.array([s * np.array(v) for v in half for s in (1, -1)])


def ex32_lambda_generators(p: int, q: int) -> np.ndarray:
    """Basis of the displayed lattice: (n, m) = (1, 0) and (0, 1)."""
    delta = math.sqrt(q * q + 2 * p * p)
    r2 = math.sqrt(2.0)
    return math.pi * np.array([[0.0, -2.0 / r2], [delta / r2, q / r2]])


def ex32_line(p: int, q: int, x1: float, x2: float) -> tuple[np.ndarray, np.ndarray]:
    delta = math.sqrt(q * q + 2 * p * p)
    c = 1.0 / (math.sqrt(2.0) * delta)
    u = c * np.array([q * x1 - delta * x2, q * x1 + delta * x2, 2 * p * x1])
    v = np.array([-p, -p, q]) / delta
    return u, v


def ex32_s_branches(p: int, q: int, x1: float, x2: float) -> list[tuple[float, bool]]:
    """The four printed choices of s(x1, x2) with their printed conditions.

    A '±' in a condition is read as "for at least one sign"; in the third and
    fourth conditions the two '±' signs are taken together.
    """
    delta = math.sqrt(q * q + 2 * p * p)
    r2 = math.sqrt(2.0)
    a = (2 * p * p - q * q) * x1 / (r2 * delta)
    b = q * abs(x2) / r2
    s1 = q * x1 / (r2 * p)
    s2 = r2 * p * x1 / q
    common = delta ** 2 * x1 / (2 * r2 * p * q)
    shift = delta / (2 * p) - delta / (2 * q) - delta * abs(x2) / (2 * r2 * p)
    s3 = shift + common
    s4 = -shift + common
    c1 = any(sg * a + b >= q - p for sg in (1, -1))
    c2 = any(sg * a - b >= p - q for sg in (1, -1))
    c3 = any(a + sg * b >= sg * (q - p) for sg in (1, -1))
    c4 = any(-a + sg * b >= sg * (q - p) for sg in (1, -1))
    return [(s1, c1), (s2, c2), (s3, c3), (s4, c4)]


def ex32_grid(n: int = 5) -> np.ndarray:
    """n x n grid well inside the projected hexagon (p = q = 1)."""
    xs = np.linspace(-0.5, 0.5, n)
    ys = np.linspace(-0.7, 0.7, n)
    return np.array([(x, y) for x in xs for y in ys])


# ---------------------------------------------------------------------------
# Vandermonde example

EX33_NODES = (0, 1, -1, 2, -2)
EX33_M = 3

EX33_M_PRINTED = [
    [F(1), F(0), F(-5, 4), F(0), F(1, 4)],
    [F(0), F(2, 3), F(2, 3), F(-1, 6), F(-1, 6)],
    [F(0), F(-2, 3), F(2, 3), F(1, 6), F(-1, 6)],
    [F(0), F(-1, 12), F(-1, 24), F(1, 12), F(1, 24)],
    [F(0), F(1, 12), F(-1, 24), F(-1, 12), F(1, 24)],
]

EX33_KBAR = ((-4, 0, 1, 0, 0), (0, -4, 0, 1, 0), (0, 0, -4, 0, 1))

EX33_LAMBDA_PRIME = ((4, 3, 3), (0, 3, -3), (0, 3, 3))

_h = [(F(1, 2), F(-5, 3), F(0)), (F(-5, 2), F(0), F(5, 3)), (F(-2), F(-1, 3), F(4, 3)),
      (F(1, 2), F(0), F(-5, 3)), (F(-5, 2), F(5, 3), F(0)), (F(-2), F(4, 3), F(-1, 3))]
EX33_VERTICES = tuple(v for w in _h for v in (w, tuple(-x for x in w)))


def vandermonde(nodes) -> list[list[Fraction]]:
    d = len(nodes)
    return [[F(x) ** j for j in range(d)] for x in nodes]


def ex33_matrix(nodes=EX33_NODES) -> list[list[Fraction]]:
    """M with (M^{-1})^T the Vandermonde matrix of ``nodes``."""
    return exact.inverse(exact.transpose(vandermonde(nodes)))


def ex33_spec() -> ZonotopeSpec:
    return ZonotopeSpec(tuple(map(tuple, ex33_matrix())), EX33_M)


def monic_kernel(nodes, m: int) -> list[list[Fraction]]:
    """Shifted coefficient vectors of prod_{i>m} (x - x_i)."""
    coeffs = [F(1)]
    for r in nodes[m:]:
        coeffs = [F(0)] + coeffs
        for j in range(len(coeffs) - 1):
            coeffs[j] -= F(r) * coeffs[j + 1]
    d = len(nodes)
    return [[F(0)] * i + coeffs + [F(0)] * (d - len(coeffs) - i) for i in range(m)]
