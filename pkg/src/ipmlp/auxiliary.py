"""Big-M auxiliary problem, its explicit constants and the starting point.

For integral data ``A`` (m x n), ``b``, ``c`` bounded by ``U`` the
auxiliary primal is

    min  c^T x + M x_{n+2}
    s.t. A x + rho x_{n+2} = d
         e^T x + x_{n+1} + x_{n+2} = n + 2,   x >= 0

with ``d = b / W`` and ``rho = d - A e``.  The all-ones vector is feasible
and gives an explicit interior point of the primal/dual pair.
"""

import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from .errors import ConstantOverflow, NonIntegralData
from .model import StandardLP
from .newton import Iterate
from .numerics import FLOAT, RATIONAL, mpq

FLOAT_START_MARGIN = 1e-9


@dataclass(frozen=True)
class TheoreticalConstants:
    """Exact constants of the construction (always stored as rationals)."""

    m: int
    n: int
    U: int
    W: object
    R: object
    Q: object
    M: object
    mu0_sq: object  # 4 (M^2 + sum c_i^2)
    mu0: object     # rational upper bound on sqrt(mu0_sq)
    mu_f: object

    @property
    def split_threshold(self):
        """``Q / (4 (n+2))``, the cut between the B and N index sets."""
        return self.Q / (4 * (self.n + 2))


def theoretical_constants(m, n, U, c):
    """Evaluate W, R, Q, M, mu0 and mu_f for an m x n instance with bound U."""
    W = mpq(m * U) ** m
    R = 1 / (W * W * 2 * n * mpq((m + 1) * U) ** (3 * (m + 1)))
    Q = R / (n + 2)
    M = 4 * n * U / R
    mu0_sq = 4 * (M * M + sum((mpq(v) ** 2 for v in c), mpq(0)))
    mu0 = ceil_sqrt_rational(mu0_sq)
    mu_f = R * Q / (64 * (n + 2) ** 2 * mpq((m + 1) * U) ** (m + 2))
    return TheoreticalConstants(m, n, U, W, R, Q, M, mu0_sq, mu0, mu_f)


def ceil_sqrt_rational(v):
    """Least integer whose square is at least the rational ``v``."""
    v = mpq(v)
    r = int(gmpy2.isqrt(gmpy2.f_div(v.numerator, v.denominator)))
    while mpq(r * r) < v:
        r += 1
    return mpq(r)


def initial_mu(consts: TheoreticalConstants, sigma_bound=mpq(1, 2)):
    """Starting mu with ``sigma^2 = (M^2 + sum c^2) / mu^2 <= sigma_bound^2``."""
    if mpq(sigma_bound) == mpq(1, 2):
        return consts.mu0
    return ceil_sqrt_rational(consts.mu0_sq / (4 * mpq(sigma_bound) ** 2))


@dataclass
class AuxiliaryProblem:
    base: StandardLP
    aux: StandardLP
    d: np.ndarray
    rho: np.ndarray
    consts: TheoreticalConstants

    @property
    def n(self):
        return self.base.n

    @property
    def m(self):
        return self.base.m

    @property
    def slack_index(self):
        return self.base.n

    @property
    def artificial_index(self):
        return self.base.n + 1

    def role(self, j):
        if j < self.base.n:
            return "original"
        return "slack" if j == self.base.n else "artificial"

    # dual layout: y_{m+1} is the last entry of y; s_{n+1}, s_{n+2} the last two of s
    @property
    def y_extra_index(self):
        return self.base.m


def build_auxiliary(p: StandardLP, backend=None) -> AuxiliaryProblem:
    """Construct the auxiliary problem for preprocessed integral data.

    ``backend`` selects the arithmetic of the returned ``aux`` problem
    (defaults to the backend of ``p``); constants are always exact.
    """
    backend = backend or p.backend
    exact_base = p.with_backend(RATIONAL)
    U = exact_base.U
    if U is None:
        raise NonIntegralData("the auxiliary construction needs integral A, b, c")
    m, n = p.m, p.n
    consts = theoretical_constants(m, n, U, exact_base.c)
    A, b, c = exact_base.A, exact_base.b, exact_base.c
    d = b / consts.W
    rho = d - A @ np.array([mpq(1)] * n, dtype=object) if m else np.empty(0, dtype=object)
    rows = [list(A[i]) + [mpq(0), rho[i]] for i in range(m)]
    rows.append([mpq(1)] * (n + 2))
    b_aux = list(d) + [mpq(n + 2)]
    c_aux = list(c) + [mpq(0), consts.M]
    columns = list(p.columns) + [("aux_slack", None), ("artificial", None)]
    aux = StandardLP(
        A=RATIONAL.matrix(rows, cols=n + 2),
        b=RATIONAL.vector(b_aux),
        c=RATIONAL.vector(c_aux),
        columns=columns,
        rows=list(p.rows) + [None],
        var_names=list(p.var_names or [f"x{j + 1}" for j in range(n)]) + ["_bound_slack", "_artificial"],
    )
    if not backend.exact:
        for name in ("M", "mu0", "mu_f", "R"):
            v = float(getattr(consts, name))
            if v == 0 or not math.isfinite(v):
                raise ConstantOverflow(f"constant {name} is not representable in binary64; use exact mode")
        aux = aux.with_backend(FLOAT)
    return AuxiliaryProblem(base=p, aux=aux, d=d, rho=rho, consts=consts)


def initial_iterate(ap: AuxiliaryProblem, sigma_bound=None) -> Iterate:
    """All-ones primal point with the matching dual and mu.

    ``sigma_bound`` (default 1/2) sets how centred the start must be; a
    smaller bound is needed by the alternative step rule.
    """
    n, m = ap.n, ap.m
    consts = ap.consts
    exact = ap.aux.backend.exact
    if sigma_bound is None:
        mu = consts.mu0
    else:
        mu = initial_mu(consts, sigma_bound)
    if not exact:
        # real square root, nudged up so rounding cannot push sigma^2 past the bound
        if sigma_bound is None:
            sigma_bound = 0.5
        mu = math.sqrt(float(consts.mu0_sq) / 4.0) / float(sigma_bound) * (1 + FLOAT_START_MARGIN)
    backend = ap.aux.backend
    c = ap.aux.c
    x = backend.ones(n + 2)
    y = backend.zeros(m + 1)
    y[m] = -mu
    s = backend.zeros(n + 2)
    s[:n] = c[:n] + mu
    s[n] = mu
    s[n + 1] = c[n + 1] + mu
    return Iterate(x, y, s, backend.scalar(mu))


def probe_lp(p: StandardLP) -> StandardLP:
    """``min 0  s.t.  A x = 0, c^T x = -1, x >= 0``: feasible iff p has a descent ray."""
    backend = p.backend
    rows = [list(p.A[i]) for i in range(p.m)] + [list(p.c)]
    rhs = [0] * p.m + [-1]
    return StandardLP(
        A=backend.matrix(rows, cols=p.n),
        b=backend.vector(rhs),
        c=backend.zeros(p.n),
        columns=list(p.columns),
        rows=list(range(p.m + 1)),
        var_names=p.var_names,
    )
