"""Exact rational and integer linear algebra.

Everything here works on plain Python ``Fraction``/``int`` lists of rows, so
results never depend on floating-point rounding.  Matrices are small
(d <= 20), which keeps the cubic elimination loops cheap.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import SingularMatrix

Matrix = list[list[Fraction]]


def to_rational(value) -> Fraction | float:
    """Parse a coordinate: ``"p/q"`` strings and ints become ``Fraction``.

    Python floats are kept as floats; they mark inexact (possibly irrational)
    coordinates.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a coordinate")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite coordinate {value!r}")
        return value
    # numpy scalars
    if hasattr(value, "dtype"):
        if value.dtype.kind in "iu":
            return Fraction(int(value))
        return float(value)
    raise TypeError(f"cannot interpret {value!r} as a coordinate")


def is_exact(value) -> bool:
    return isinstance(value, (Fraction, int)) and not isinstance(value, bool)


def format_rational(value) -> str | float:
    if isinstance(value, Fraction):
        return str(value)
    return float(value)


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def _echelon(rows: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over Q; returns (rref, pivot columns)."""
    a = [list(r) for r in rows]
    if not a:
        return a, []
    ncols = len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a, pivots


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return len(_echelon(as_matrix(rows))[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> Matrix:
    """Basis of {x : rows @ x = 0} over Q (one vector per free column)."""
    if not rows:
        if ncols is None:
            raise ValueError("ncols required for an empty system")
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    a, pivots = _echelon(as_matrix(rows))
    n = len(a[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, p in zip(a, pivots):
            x[p] = -row[f]
        basis.append(x)
    return basis


def det(rows: Sequence[Sequence]) -> Fraction:
    a = as_matrix(rows)
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("determinant of a non-square matrix")
    result = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if a[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            a[c], a[pivot] = a[pivot], a[c]
            result = -result
        result *= a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return result


def inverse(rows: Sequence[Sequence]) -> Matrix:
    a = as_matrix(rows)
    n = len(a)
    aug = [row + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    red, pivots = _echelon(aug)
    if pivots[:n] != list(range(n)):
        raise SingularMatrix("matrix is singular over Q")
    return [row[n:] for row in red]


def solve(rows: Sequence[Sequence], rhs: Sequence) -> list[Fraction] | None:
    """Solve rows @ x = rhs; returns one solution or None if inconsistent."""
    a = as_matrix(rows)
    aug = [r + [Fraction(b)] for r, b in zip(a, rhs)]
    red, pivots = _echelon(aug)
    n = len(a[0])
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for row, p in zip(red, pivots):
        x[p] = row[n]
    return x


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(c) for c in zip(*a)]


def lcm_denominator(values: Iterable[Fraction]) -> int:
    n = 1
    for v in values:
        n = math.lcm(n, Fraction(v).denominator)
    return n


def primitive_integer(vec: Sequence[Fraction]) -> list[int]:
    """Scale a nonzero rational vector to a primitive integer vector.

    The sign is kept (no normalization of direction).
    """
    n = lcm_denominator(vec)
    ints = [int(Fraction(v) * n) for v in vec]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return [x // g for x in ints]


def canonical_direction(vec: Sequence[int]) -> tuple[int, ...]:
    """Primitive integer vector with first nonzero entry positive."""
    prim = primitive_integer([Fraction(x) for x in vec])
    for x in prim:
        if x != 0:
            if x < 0:
                prim = [-y for y in prim]
            break
    return tuple(prim)


def integer_nullspace(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Basis of the full integer lattice {k in Z^n : rows @ k = 0}.

    Column operations by unimodular transforms bring ``rows`` to lower
    echelon form; the columns of the accumulated transform past the rank
    span the integer kernel, and because the transform is unimodular that
    basis is saturated (it generates Z^n intersected with the kernel).
    """
    a = [[int(x) for x in r] for r in rows]
    n = ncols
    u = [[int(i == j) for j in range(n)] for i in range(n)]  # columns are basis vectors

    def colop(i: int, j: int, p: int, q: int, r: int, s: int) -> None:
        # (col_i, col_j) <- (p col_i + q col_j, r col_i + s col_j), det = ±1
        for mat in (a, u):
            for row in mat:
                x, y = row[i], row[j]
                row[i], row[j] = p * x + q * y, r * x + s * y

    col = 0
    for row_idx in range(len(a)):
        if col >= n:
            break
        row = a[row_idx]
        for j in range(col + 1, n):
            if row[j] == 0:
                continue
            x, y = row[col], row[j]
            if x == 0:
                colop(col, j, 0, 1, 1, 0)
                continue
            g, s, t = _ext_gcd(x, y)
            # new col = s*col + t*colj (entry g); new colj = -(y/g) col + (x/g) colj (entry 0)
            colop(col, j, s, t, -(y // g), x // g)
        if a[row_idx][col] != 0:
            col += 1
    return [[u[i][j] for i in range(n)] for j in range(col, n)]


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) > 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of an integer matrix of full row rank.

    Pivots are positive and entries above each pivot are reduced into
    [0, pivot).  The result is a canonical basis of the row lattice.
    """
    a = [[int(x) for x in r] for r in rows]
    if not a:
        return []
    m, n = len(a), len(a[0])
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if a[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[piv] = a[piv], a[r]
            done = True
            for i in range(r + 1, m):
                if a[i][c] != 0:
                    q = a[i][c] // a[r][c]
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    if a[i][c] != 0:
                        done = False
            if done:
                break
        if a[r][c] == 0:
            continue
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
        for i in range(r):
            q = a[i][c] // a[r][c]
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
    return [row for row in a if any(row)]


def saturate(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis of Z^n intersected with the rational row span of ``rows``."""
    n = len(rows[0])
    complement = [primitive_integer(v) for v in nullspace(rows, n)]
    if not complement:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    return integer_nullspace(complement, n)


def lattice_contains(basis: Sequence[Sequence], vec: Sequence) -> bool:
    """True iff ``vec`` is an integer combination of the rows of ``basis``."""
    coeffs = solve(transpose(basis), vec)
    if coeffs is None:
        return False
    return all(c.denominator == 1 for c in coeffs)


def same_lattice(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    return all(lattice_contains(a, v) for v in b) and all(lattice_contains(b, v) for v in a)


def rationalize(x: float, max_denominator: int = 10**6, tol: float = 1e-8,
                significance: float = 1e-3) -> tuple[Fraction | None, float]:
    """Recover a rational p/q from a float by continued-fraction convergents.

    A convergent is accepted when it matches to ``tol`` (scaled by
    max(1, |x|)) *and* its error is far below the generic Dirichlet bound
    1/q^2 (``error * q^2 <= significance``); without the second test every
    real number would pass, since some p/q with q <= 10^6 always lies
    within 10^-8.  Returns (fraction or None, best residual seen).
    """
    scale = max(1.0, abs(x))
    best = math.inf
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    rem = x
    for _ in range(64):
        a = math.floor(rem)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_denominator:
            break
        err = abs(x - h1 / k1)
        best = min(best, err / scale)
        if err <= tol * scale and err * k1 * k1 <= significance * scale:
            return Fraction(h1, k1), err / scale
        frac = rem - a
        if frac < 1e-300:
            break
        rem = 1.0 / frac
    return None, best
