"""Brute-force exact reference: vertex enumeration and bound checks.

Everything here is exponential in the number of columns and meant for
instances with at most a handful of variables.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from . import numerics
from .auxiliary import probe_lp
from .errors import OracleTooLarge, SingularSystem
from .model import StandardLP
from .numerics import RATIONAL, mpq

DEFAULT_CAP = 10


@dataclass
class Vertex:
    x: np.ndarray
    basis: tuple
    objective: object


@dataclass
class VertexSet:
    vertices: list = field(default_factory=list)

    def __len__(self):
        return len(self.vertices)

    @property
    def optimum(self):
        return min((v.objective for v in self.vertices), default=None)

    @property
    def optimal(self):
        best = self.optimum
        return [v for v in self.vertices if v.objective == best]


@dataclass
class DualVertex:
    y: np.ndarray
    s: np.ndarray
    basis: tuple
    objective: object


@dataclass
class OracleResult:
    status: str  # optimal | infeasible | unbounded
    vertices: VertexSet
    objective: object = None
    ray: Optional[np.ndarray] = None


def _exact(p: StandardLP):
    if not p.backend.exact:
        p = p.with_backend(RATIONAL)
    return p


def _guard(p: StandardLP, cap):
    if p.n > cap:
        raise OracleTooLarge(f"{p.n} columns exceed the enumeration cap of {cap}")


def _basic_solution(A, b, cols):
    """Unique solution supported on ``cols``, or None when there is none."""
    n = A.shape[1]
    x = RATIONAL.zeros(n)
    if not cols:
        return x if all(v == 0 for v in b) else None
    try:
        z = numerics.solve_unique(A[:, list(cols)], b)
    except SingularSystem:
        return None
    for j, v in zip(cols, z):
        x[j] = v
    return x


def enumerate_vertices(p: StandardLP, cap=DEFAULT_CAP) -> VertexSet:
    """All basic feasible solutions, each listed once under its smallest basis."""
    p = _exact(p)
    _guard(p, cap)
    r = numerics.rank(p.A) if p.m else 0
    seen = {}
    for size in range(0, r + 1):
        for cols in combinations(range(p.n), size):
            if size and numerics.rank(p.A[:, list(cols)]) < size:
                continue
            x = _basic_solution(p.A, p.b, cols)
            if x is None or any(v < 0 for v in x):
                continue
            key = tuple(x)
            if key not in seen:
                seen[key] = Vertex(x, cols, p.c @ x)
    verts = sorted(seen.values(), key=lambda v: (len(v.basis), v.basis))
    return VertexSet(verts)


def enumerate_dual_vertices(p: StandardLP, cap=DEFAULT_CAP):
    """Basic feasible solutions of ``A^T y + s = c, s >= 0``.

    Rows of ``A`` must be independent.  A dual vertex makes ``s`` vanish on
    ``m`` columns forming a nonsingular square block.
    """
    p = _exact(p)
    _guard(p, cap)
    m = p.m
    if numerics.rank(p.A) < m:
        raise ValueError("dual enumeration needs independent rows")
    found = {}
    for cols in combinations(range(p.n), m):
        block = p.A[:, list(cols)]
        if numerics.determinant(block) == 0:
            continue
        y = numerics.solve_unique(block.T, p.c[list(cols)])
        s = p.c - p.A.T @ y
        if any(v < 0 for v in s):
            continue
        key = tuple(y)
        if key not in found:
            found[key] = DualVertex(y, s, cols, p.b @ y)
    return sorted(found.values(), key=lambda d: d.basis)


def find_ray(p: StandardLP, cap=DEFAULT_CAP):
    """A vertex ray of ``{A r = 0, c^T r = -1, r >= 0}``, or None."""
    vs = enumerate_vertices(probe_lp(_exact(p)), cap)
    return vs.vertices[0].x if vs.vertices else None


def classify(p: StandardLP, cap=DEFAULT_CAP) -> OracleResult:
    """Feasibility class and optimal value by enumeration."""
    p = _exact(p)
    vs = enumerate_vertices(p, cap)
    if not vs.vertices:
        return OracleResult("infeasible", vs)
    ray = find_ray(p, cap)
    if ray is not None:
        return OracleResult("unbounded", vs, ray=ray)
    return OracleResult("optimal", vs, objective=vs.optimum)


@dataclass
class BoundReport:
    z: np.ndarray
    upper: object
    lower: object
    rect_upper: Optional[object]
    violations: list

    @property
    def ok(self):
        return not self.violations


def check_solution_bounds(G, g, k=None, U=None, U_rhs=None) -> BoundReport:
    """Cramer-type bounds for the unique solution of ``G z = g``.

    With ``k`` unknowns and entries bounded by ``U``, every coordinate has
    ``|z_i| <= (kU)^k`` and, if nonzero, ``|z_i| >= 1/(kU)^k``.  When the
    right-hand side has its own bound ``U_rhs`` the upper bound tightens to
    ``k^k U^(k-1) U_rhs``.
    """
    G = RATIONAL.convert(np.asarray(G, dtype=object))
    g = RATIONAL.convert(np.asarray(g, dtype=object))
    k = k or G.shape[1]
    if U is None:
        U = max([1] + [int(abs(v)) for v in list(G.ravel()) + list(g)])
    z = numerics.solve_unique(G, g)
    upper = mpq(k * U) ** k
    lower = 1 / upper
    violations = []
    for i, v in enumerate(z):
        if abs(v) > upper:
            violations.append(f"|z[{i}]| = {abs(v)} exceeds {upper}")
        if v != 0 and abs(v) < lower:
            violations.append(f"|z[{i}]| = {abs(v)} is below {lower}")
    rect = None
    if U_rhs is not None:
        rect = mpq(k) ** k * mpq(U) ** (k - 1) * U_rhs
        for i, v in enumerate(z):
            if abs(v) > rect:
                violations.append(f"|z[{i}]| = {abs(v)} exceeds rhs-scaled bound {rect}")
    return BoundReport(z, upper, lower, rect, violations)


@dataclass
class Witness:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray


def _greedy_average(points, support):
    """Average of a greedily chosen subset covering every index any point touches."""
    chosen = []
    covered = set()
    for pt in points:
        idx = support(pt)
        if idx - covered or not chosen:
            chosen.append(pt)
            covered |= idx
    return chosen


def strict_complementarity_witness(p: StandardLP, vs: VertexSet, duals=None) -> Witness:
    """Strictly complementary optimal pair built from enumerated vertices.

    The primal part averages a covering subset of optimal vertices; the dual
    part averages a covering subset of optimal dual vertices.
    """
    p = _exact(p)
    opt = vs.optimal
    if not opt:
        raise ValueError("witness needs a feasible bounded problem")
    prim = _greedy_average([v.x for v in opt], lambda x: {i for i, v in enumerate(x) if v > 0})
    x = sum(prim[1:], prim[0].copy()) / len(prim)
    if duals is None:
        duals = enumerate_dual_vertices(p)
    best = vs.optimum
    dopt = [d for d in duals if d.objective == best]
    if not dopt:
        raise ValueError("no optimal dual vertex found")
    chosen = _greedy_average(dopt, lambda d: {i for i, v in enumerate(d.s) if v > 0})
    y = sum((d.y for d in chosen[1:]), chosen[0].y.copy()) / len(chosen)
    s = p.c - p.A.T @ y
    return Witness(x, y, s)


def vertex_coordinate_bound_ok(vs: VertexSet, W) -> bool:
    """Every vertex coordinate is at most ``W``."""
    return all(v <= W for vert in vs.vertices for v in vert.x)


def vertex_floor_ok(vs: VertexSet, R) -> bool:
    """Every nonzero vertex coordinate is at least ``R``."""
    return all(v == 0 or v >= R for vert in vs.vertices for v in vert.x)


def witness_floor_ok(w: Witness, Q) -> bool:
    """Each index has ``x_i >= Q`` with ``s_i = 0`` or ``s_i >= Q`` with ``x_i = 0``."""
    return all((xi >= Q and si == 0) or (si >= Q and xi == 0) for xi, si in zip(w.x, w.s))
