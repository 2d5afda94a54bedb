"""Dense linear algebra over two scalar backends.

Vectors and matrices are numpy arrays.  The rational backend stores
``gmpy2.mpq`` entries in ``dtype=object`` arrays so every operation is exact;
the float backend uses ordinary ``float64`` arrays.  The backend of an array
is recovered from its dtype, so kernels never need a backend argument.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import gmpy2
import numpy as np

from .errors import SingularSystem

mpq = gmpy2.mpq

EPS_PIVOT = 1e-10
EPS_CHOLESKY = 1e-14  # relative pivot floor for float LDL^T; near-degenerate optima get close
EPS_RES = 1e-9


def to_rational(value):
    """Exact rational from an int, float, Fraction, mpq or ``"p/q"`` string."""
    if isinstance(value, str):
        text = value.strip()
        if "e" in text.lower() or "." in text:
            return mpq(Fraction(text))
        return mpq(text)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    return mpq(value)


@dataclass(frozen=True)
class Backend:
    name: str
    exact: bool

    def scalar(self, value):
        if self.exact:
            return to_rational(value)
        if isinstance(value, str):
            return float(Fraction(value))
        return float(value)

    def vector(self, values):
        if self.exact:
            return np.array([to_rational(v) for v in values], dtype=object)
        return np.array([self.scalar(v) for v in values], dtype=float)

    def matrix(self, rows, cols=None):
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if self.exact:
            out = np.empty((len(rows), cols), dtype=object)
            for i, row in enumerate(rows):
                for j, v in enumerate(row):
                    out[i, j] = to_rational(v)
            return out
        if not rows:
            return np.zeros((0, cols))
        return np.array([[self.scalar(v) for v in r] for r in rows], dtype=float)

    def zeros(self, shape):
        if self.exact:
            out = np.empty(shape, dtype=object)
            out.fill(mpq(0))
            return out
        return np.zeros(shape)

    def ones(self, n):
        if self.exact:
            return np.array([mpq(1)] * n, dtype=object)
        return np.ones(n)

    def convert(self, array):
        """Re-express ``array`` (any backend) in this backend."""
        array = np.asarray(array)
        if self.exact:
            flat = [to_rational(v) for v in array.ravel()]
            out = np.empty(array.shape, dtype=object)
            out.ravel()[:] = flat
            return out
        return np.array([float(v) for v in array.ravel()], dtype=float).reshape(array.shape)


RATIONAL = Backend("rational", True)
FLOAT = Backend("float", False)


def get_backend(name):
    if name in ("rational", "exact"):
        return RATIONAL
    if name == "float":
        return FLOAT
    raise ValueError(f"unknown backend {name!r}")


def backend_of(array):
    return RATIONAL if np.asarray(array).dtype == object else FLOAT


def _is_zero(value, exact, tol=0.0):
    if exact:
        return value == 0
    return abs(value) <= tol


class RowReduction(NamedTuple):
    reduced: np.ndarray
    reduced_rhs: np.ndarray
    rank: int
    inconsistent: bool
    kept_rows: list


def row_reduce(M, rhs):
    """Keep a maximal set of independent rows of ``M`` (first-come order).

    Rows are reduced against the echelon basis built so far; a row that
    vanishes is dropped, and if its right-hand side does not vanish the
    system is flagged inconsistent.  The returned matrix consists of the
    original (unreduced) kept rows.
    """
    M = np.asarray(M)
    rhs = np.asarray(rhs)
    if rhs.shape[0] != M.shape[0]:
        raise ValueError("rhs length must equal row count")
    exact = backend_of(M).exact
    basis = []  # (pivot column, reduced row, reduced rhs)
    kept = []
    inconsistent = False
    for i in range(M.shape[0]):
        row = M[i].copy()
        r = rhs[i]
        scale = max((abs(v) for v in row), default=0)
        for col, brow, br in basis:
            factor = row[col] / brow[col]
            if not _is_zero(factor, exact):
                row = row - factor * brow
                r = r - factor * br
        tol = EPS_PIVOT * max(scale, 1.0) if not exact else 0
        pivot = None
        if exact:
            for j, v in enumerate(row):
                if v != 0:
                    pivot = j
                    break
        else:
            j = int(np.argmax(np.abs(row))) if row.size else 0
            if row.size and abs(row[j]) > tol:
                pivot = j
        if pivot is None:
            rtol = EPS_PIVOT * max(abs(rhs[i]), 1.0) if not exact else 0
            if not _is_zero(r, exact, rtol):
                inconsistent = True
            continue
        basis.append((pivot, row, r))
        kept.append(i)
    reduced = M[kept] if kept else M[:0]
    return RowReduction(reduced, rhs[kept], len(kept), inconsistent, kept)


def independent_columns(M):
    """Indices of a maximal linearly independent set of columns."""
    M = np.asarray(M)
    if M.shape[1] == 0:
        return []
    dummy = backend_of(M).zeros(M.shape[1])
    return row_reduce(M.T, dummy).kept_rows


def rank(M):
    M = np.asarray(M)
    if M.shape[0] == 0 or M.shape[1] == 0:
        return 0
    return row_reduce(M, backend_of(M).zeros(M.shape[0])).rank


def solve_unique(M, g):
    """Solve ``M z = g`` when it has exactly one solution.

    ``M`` may be square or tall; a tall system must be consistent.
    Raises SingularSystem when a column has no pivot or leftover equations
    are violated.
    """
    M = np.asarray(M)
    g = np.asarray(g)
    exact = backend_of(M).exact and backend_of(g).exact
    rows, cols = M.shape
    if g.shape[0] != rows:
        raise ValueError("rhs length must equal row count")
    if rows < cols:
        raise SingularSystem("fewer equations than unknowns")
    if exact:
        A = [[v for v in M[i]] + [g[i]] for i in range(rows)]
    else:
        A = np.hstack([M.astype(float), g.astype(float).reshape(-1, 1)])
    scale = max([1.0] + [abs(float(v)) for v in np.asarray(M).ravel()]) if not exact else 1
    for c in range(cols):
        if exact:
            p = next((r for r in range(c, rows) if A[r][c] != 0), None)
        else:
            p = c + int(np.argmax(np.abs(A[c:, c])))
            if abs(A[p, c]) <= EPS_PIVOT * scale:
                p = None
        if p is None:
            raise SingularSystem(f"no pivot in column {c}")
        if p != c:
            if exact:
                A[c], A[p] = A[p], A[c]
            else:
                A[[c, p]] = A[[p, c]]
        piv = A[c][c]
        for r in range(c + 1, rows):
            if exact:
                factor = A[r][c] / piv
                if factor:
                    A[r] = [a - factor * b for a, b in zip(A[r], A[c])]
            else:
                factor = A[r, c] / piv
                if factor:
                    A[r] -= factor * A[c]
    for r in range(cols, rows):
        leftover = A[r][cols]
        if exact:
            if leftover != 0:
                raise SingularSystem("inconsistent overdetermined system")
        elif abs(leftover) > EPS_RES * max(1.0, scale, float(np.max(np.abs(g))) if g.size else 1.0):
            raise SingularSystem("inconsistent overdetermined system")
    z = [None] * cols
    for c in range(cols - 1, -1, -1):
        acc = A[c][cols]
        for j in range(c + 1, cols):
            acc = acc - A[c][j] * z[j]
        z[c] = acc / A[c][c]
    if exact:
        return np.array(z, dtype=object)
    return np.array(z, dtype=float)


def normal_matrix(A, D):
    """``A diag(D) A^T`` without materialising the diagonal."""
    return (A * D) @ A.T


def solve_normal_equations(A, D, rhs):
    """Solve ``(A diag(D) A^T) k = rhs`` by square-root-free LDL^T.

    Every pivot must be positive; a non-positive pivot means the matrix is
    not positive definite (rank loss in ``A`` or a non-positive ``D``).
    """
    A = np.asarray(A)
    D = np.asarray(D)
    rhs = np.asarray(rhs)
    exact = backend_of(A).exact and backend_of(D).exact
    N = normal_matrix(A, D)
    m = N.shape[0]
    if rhs.shape[0] != m:
        raise ValueError("rhs length must equal row count of A")
    if m == 0:
        return rhs.copy()
    N = [list(row) for row in N]
    L = [[None] * m for _ in range(m)]
    d = [None] * m
    for j in range(m):
        acc = N[j][j]
        for p in range(j):
            acc = acc - L[j][p] * L[j][p] * d[p]
        # float pivots are judged against their own diagonal, which is scale invariant
        if acc <= (0 if exact else EPS_CHOLESKY * abs(N[j][j])):
            raise SingularSystem("normal matrix not positive definite")
        d[j] = acc
        for i in range(j + 1, m):
            acc = N[i][j]
            for p in range(j):
                acc = acc - L[i][p] * L[j][p] * d[p]
            L[i][j] = acc / d[j]
    # forward: L w = rhs; then D v = w; back: L^T k = v
    w = [None] * m
    for i in range(m):
        acc = rhs[i]
        for p in range(i):
            acc = acc - L[i][p] * w[p]
        w[i] = acc
    k = [None] * m
    for i in range(m - 1, -1, -1):
        acc = w[i] / d[i]
        for p in range(i + 1, m):
            acc = acc - L[p][i] * k[p]
        k[i] = acc
    return np.array(k, dtype=object if exact else float)


def determinant(M):
    """Determinant by elimination; exact for rational input."""
    M = np.asarray(M)
    n, cols = M.shape
    if n != cols:
        raise ValueError("determinant needs a square matrix")
    exact = backend_of(M).exact
    if not exact:
        return float(np.linalg.det(M.astype(float))) if n else 1.0
    A = [list(row) for row in M]
    det = mpq(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return mpq(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        piv = A[c][c]
        det *= piv
        for r in range(c + 1, n):
            factor = A[r][c] / piv
            if factor:
                A[r] = [a - factor * b for a, b in zip(A[r], A[c])]
    return det


def max_abs(values):
    return max((abs(v) for v in np.asarray(values).ravel()), default=0)
