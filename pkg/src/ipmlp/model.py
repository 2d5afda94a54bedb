"""Problem representations, standard-form conversion and rank preprocessing."""

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import numerics
from .errors import NotFeasible
from .numerics import RATIONAL, backend_of, mpq


@dataclass
class Constraint:
    coeffs: list
    sense: str  # "<=", "=", ">="
    rhs: object
    name: Optional[str] = None

    def __post_init__(self):
        if self.sense not in ("<=", "=", ">="):
            raise ValueError(f"bad constraint sense {self.sense!r}")


@dataclass
class GeneralLP:
    """An LP over nonnegative variables with mixed constraint senses."""

    sense: str  # "min" or "max"
    objective: list
    constraints: list
    var_names: Optional[list] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"bad objective sense {self.sense!r}")
        n = len(self.objective)
        for con in self.constraints:
            if len(con.coeffs) != n:
                raise ValueError("constraint length differs from variable count")
        if self.var_names is None:
            self.var_names = [f"x{j + 1}" for j in range(n)]

    @property
    def n(self):
        return len(self.objective)


@dataclass
class StandardLP:
    """``min c^T x  s.t.  A x = b, x >= 0``.

    ``columns`` records where every column came from: ``("var", j)`` for an
    original variable, ``("slack", i)`` / ``("surplus", i)`` for columns added
    for row ``i``.  ``rows`` maps each row to the row of the problem it was
    derived from.  The original objective equals ``objective_sign * c^T x``.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    columns: list = field(default=None)
    rows: list = field(default=None)
    objective_sign: int = 1
    var_names: Optional[list] = None

    def __post_init__(self):
        m, n = self.A.shape
        if self.b.shape != (m,) or self.c.shape != (n,):
            raise ValueError("inconsistent dimensions")
        if self.columns is None:
            self.columns = [("var", j) for j in range(n)]
        if self.rows is None:
            self.rows = list(range(m))

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def backend(self):
        return backend_of(self.A)

    @property
    def U(self):
        """Integer bound on all data magnitudes, or None for non-integral data."""
        return integer_bound(self.A, self.b, self.c)

    def with_backend(self, backend):
        return replace(self, A=backend.convert(self.A), b=backend.convert(self.b),
                       c=backend.convert(self.c))

    def objective(self, x):
        return self.c @ x


@dataclass
class DualSolution:
    y: np.ndarray
    s: np.ndarray


@dataclass
class InfeasibleEvidence:
    reason: str
    row: Optional[int] = None


@dataclass
class DirectSolution:
    """Outcome of a square full-rank system: the only candidate point."""

    lp: StandardLP
    x: np.ndarray
    feasible: bool


@dataclass
class Reduced:
    lp: StandardLP


def integer_bound(*arrays):
    """Smallest integer ``U >= 1`` bounding every entry, None unless all integral."""
    U = 1
    for arr in arrays:
        for v in np.asarray(arr).ravel():
            if backend_of(arr).exact:
                if v.denominator != 1:
                    return None
                U = max(U, abs(int(v.numerator)))
            else:
                if float(v) != math.floor(float(v)):
                    return None
                U = max(U, int(abs(v)))
    return U


def to_standard_form(p: GeneralLP, backend=RATIONAL) -> StandardLP:
    """Flip max to min and add one slack/surplus column per inequality row."""
    n = p.n
    sign = -1 if p.sense == "max" else 1
    extra = [(i, con.sense) for i, con in enumerate(p.constraints) if con.sense != "="]
    width = n + len(extra)
    rows = []
    b = []
    for con in p.constraints:
        rows.append(list(con.coeffs) + [0] * len(extra))
        b.append(con.rhs)
    columns = [("var", j) for j in range(n)]
    names = list(p.var_names)
    for k, (i, sense) in enumerate(extra):
        rows[i][n + k] = 1 if sense == "<=" else -1
        columns.append(("slack" if sense == "<=" else "surplus", i))
        names.append(f"_{columns[-1][0]}{i + 1}")
    c = [sign * backend.scalar(v) for v in p.objective] + [0] * len(extra)
    return StandardLP(
        A=backend.matrix(rows, cols=width),
        b=backend.vector(b),
        c=backend.vector(c),
        columns=columns,
        rows=list(range(len(rows))),
        objective_sign=sign,
        var_names=names,
    )


def integralize(p: StandardLP):
    """Scale rows and the objective of rational data to integers.

    Returns ``(scaled_lp, row_scale, objective_scale)``.  Feasible and optimal
    points are unchanged; a dual ``(y', s')`` of the scaled problem maps back
    to ``y = row_scale * y' / objective_scale`` and ``s = s' / objective_scale``.
    """
    if not p.backend.exact:
        raise ValueError("integralize needs rational data")
    A = p.A.copy()
    b = p.b.copy()
    scale = []
    for i in range(p.m):
        den = math.lcm(*[int(v.denominator) for v in list(A[i]) + [b[i]]])
        A[i] = A[i] * den
        b[i] = b[i] * den
        scale.append(mpq(den))
    cden = math.lcm(*[int(v.denominator) for v in p.c]) if p.n else 1
    row_scale = np.array(scale, dtype=object)
    return replace(p, A=A, b=b, c=p.c * cden), row_scale, mpq(cden)


def preprocess(p: StandardLP):
    """Drop dependent rows; detect inconsistency and the square case."""
    red = numerics.row_reduce(p.A, p.b)
    if red.inconsistent:
        return InfeasibleEvidence("equality constraints are inconsistent")
    lp = replace(p, A=red.reduced, b=red.reduced_rhs, rows=[p.rows[i] for i in red.kept_rows])
    if lp.m == lp.n and lp.n > 0:
        x = numerics.solve_unique(lp.A, lp.b)
        tol = 0 if lp.backend.exact else -numerics.EPS_RES
        return DirectSolution(lp, x, all(v >= tol for v in x))
    return Reduced(lp)


def check_primal(p: StandardLP, x, strict=False):
    """Raise NotFeasible unless ``A x = b`` and ``x >= 0`` (``> 0`` if strict)."""
    exact = p.backend.exact and backend_of(x).exact
    r = p.A @ x - p.b
    if exact:
        if any(v != 0 for v in r):
            raise NotFeasible("A x != b")
    else:
        scale = numerics.max_abs(p.b) + numerics.max_abs(p.A) * numerics.max_abs(x)
        if numerics.max_abs(r) > numerics.EPS_RES * max(1.0, float(scale)):
            raise NotFeasible("A x != b")
    if strict and any(v <= 0 for v in x):
        raise NotFeasible("x not strictly positive")
    if not strict and any(v < 0 for v in x):
        raise NotFeasible("x has a negative entry")


def check_dual(p: StandardLP, d: DualSolution, strict=False):
    exact = p.backend.exact and backend_of(d.y).exact and backend_of(d.s).exact
    r = p.A.T @ d.y + d.s - p.c
    if exact:
        if any(v != 0 for v in r):
            raise NotFeasible("A^T y + s != c")
    else:
        scale = numerics.max_abs(p.c) + numerics.max_abs(p.A) * numerics.max_abs(d.y)
        if numerics.max_abs(r) > numerics.EPS_RES * max(1.0, float(scale)):
            raise NotFeasible("A^T y + s != c")
    if strict and any(v <= 0 for v in d.s):
        raise NotFeasible("s not strictly positive")
    if not strict and any(v < 0 for v in d.s):
        raise NotFeasible("s has a negative entry")


def duality_gap(p: StandardLP, x, d: DualSolution):
    """``c^T x - b^T y`` for a feasible primal/dual pair; equals ``x^T s``."""
    check_primal(p, x)
    check_dual(p, d)
    gap = p.c @ x - p.b @ d.y
    xs = x @ d.s
    if p.backend.exact and backend_of(x).exact:
        assert gap == xs
    else:
        assert abs(gap - xs) <= numerics.EPS_RES * max(1.0, abs(float(xs)), abs(float(p.c @ x)))
    return gap
