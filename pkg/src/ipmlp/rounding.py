"""Rounding a near-optimal auxiliary iterate to an exact optimal pair.

Once ``mu < mu_f`` every index has either a tiny dual slack (set ``B``) or a
tiny primal value (set ``N``).  Zeroing ``x_N`` and re-solving the equality
system on a column basis ``B1`` of ``B`` gives an exactly optimal vertex; an
exact dual with ``s_B = 0`` is obtained by the smallest correction of the
iterate's ``y``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import numerics
from .auxiliary import AuxiliaryProblem
from .errors import RoundingFailed, SingularSystem, SplitViolation
from .model import StandardLP
from .newton import Iterate
from .numerics import mpq
from .path import _log2_floor, _snap_vec


@dataclass
class SupportSplit:
    B: list
    N: list
    B1: list
    B2: list
    threshold: object
    split_margin_ok: bool = True


@dataclass
class AuxSolution:
    """An exactly verified optimal primal/dual pair of the auxiliary problem."""

    x: np.ndarray
    y: np.ndarray
    s: np.ndarray

    @property
    def artificial(self):
        return self.x[-1]


@dataclass
class Certificate:
    """Outcome of a solve.

    ``status`` is ``"optimal"``, ``"infeasible"`` or ``"unbounded"``.  For
    optimal certificates ``x``, ``y``, ``s`` solve the standard-form problem
    exactly with ``x^T s = 0``.  Infeasible certificates carry the auxiliary
    optimum (with a positive artificial variable) or the offending rows;
    unbounded ones carry a feasible ``x`` and a ray ``ray`` with
    ``A ray = 0``, ``ray >= 0`` and ``c^T ray = -1``.
    """

    status: str
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None
    objective: object = None
    ray: Optional[np.ndarray] = None
    aux: Optional[AuxSolution] = None
    reason: str = ""
    extra: dict = field(default_factory=dict)


def split_support(ap: AuxiliaryProblem, it: Iterate) -> SupportSplit:
    consts = ap.consts
    n_hat = ap.n + 2
    if not it.mu < consts.mu_f:
        raise SplitViolation("precondition: mu is not below mu_f")
    thr = consts.split_threshold
    B = [i for i in range(n_hat) if it.s[i] < thr]
    N = [i for i in range(n_hat) if it.x[i] < thr]
    if set(B) & set(N):
        raise SplitViolation(f"indices {sorted(set(B) & set(N))} fall in both B and N")
    if len(B) + len(N) != n_hat:
        raise SplitViolation("B and N do not cover every index")
    cap = 8 * it.mu / consts.Q
    if any(it.x[i] >= cap for i in N) or any(it.s[i] >= cap for i in B):
        raise SplitViolation("a small coordinate exceeds 8 mu / Q")
    A_B = ap.aux.A[:, B]
    B1 = [B[j] for j in numerics.independent_columns(A_B)]
    B2 = [i for i in B if i not in B1]
    margin_ok = it.mu <= consts.Q ** 2 / (32 * n_hat ** 2)
    return SupportSplit(B, N, B1, B2, thr, margin_ok)


def extract_optimal(ap: AuxiliaryProblem, it: Iterate, sp: SupportSplit,
                    dual_grid_bits=None) -> AuxSolution:
    """Exact optimal primal/dual pair of the auxiliary problem."""
    aux = ap.aux
    A, b, c = aux.A, aux.b, aux.c
    n_hat = aux.n
    consts = ap.consts
    x_bar = it.x
    rhs = b.copy()
    for i in sp.B2:
        rhs = rhs - A[:, i] * x_bar[i]
    try:
        x_hat = numerics.solve_unique(A[:, sp.B1], rhs) if sp.B1 else np.array([], dtype=object)
    except SingularSystem as exc:
        if sp.B1:
            raise RoundingFailed(f"basis system has no unique solution: {exc}") from exc
        x_hat = np.array([], dtype=object)
    if not sp.B1 and any(v != 0 for v in rhs):
        raise RoundingFailed("empty basis cannot satisfy the equality constraints")
    limit = consts.R / (8 * n_hat)
    drift = max((abs(x_bar[i] - v) for i, v in zip(sp.B1, x_hat)), default=mpq(0))
    if drift > limit:
        raise RoundingFailed("re-solved basis moved further than R/(8(n+2))")
    x = np.array([mpq(0)] * n_hat, dtype=object)
    for i, v in zip(sp.B1, x_hat):
        x[i] = v
    for i in sp.B2:
        x[i] = x_bar[i]
    if any(v < 0 for v in x):
        raise RoundingFailed("rounded primal point is not nonnegative")

    # dual: smallest correction of a rounded y making s vanish on B
    if dual_grid_bits is None:
        dual_grid_bits = 64 - _log2_floor(mpq(sp.threshold))
    y = _snap_vec(it.y, dual_grid_bits)
    if sp.B1:
        A_B1 = A[:, sp.B1]
        r = c[sp.B1] - A_B1.T @ y
        ones = np.array([mpq(1)] * aux.m, dtype=object)
        try:
            k = numerics.solve_normal_equations(A_B1.T, ones, r)
        except SingularSystem as exc:
            raise RoundingFailed(f"dual correction failed: {exc}") from exc
        y = y + A_B1 @ k
    s = c - A.T @ y
    if any(s[i] != 0 for i in sp.B):
        raise RoundingFailed("dual slack does not vanish on B")
    if any(v < 0 for v in s):
        raise RoundingFailed("dual slack has a negative entry")
    sol = AuxSolution(x, y, s)
    verify_pair(aux, sol.x, sol.y, sol.s)
    return sol


def verify_pair(p: StandardLP, x, y, s):
    """Exact optimality check: feasibility of both sides and ``x^T s = 0``."""
    if any(v != 0 for v in p.A @ x - p.b):
        raise RoundingFailed("A x != b")
    if any(v < 0 for v in x):
        raise RoundingFailed("x has a negative entry")
    if any(v != 0 for v in p.A.T @ y + s - p.c):
        raise RoundingFailed("A^T y + s != c")
    if any(v < 0 for v in s):
        raise RoundingFailed("s has a negative entry")
    if x @ s != 0:
        raise RoundingFailed("complementary slackness fails")
    if p.c @ x != p.b @ y:
        raise RoundingFailed("objective values differ")


def classify(ap: AuxiliaryProblem, sol: AuxSolution, probe_ray=None) -> Certificate:
    """Turn the auxiliary optimum into a certificate for the base problem.

    ``probe_ray`` is the outcome of the unboundedness probe: a ray of the
    base problem, or None when the probe was infeasible.
    """
    base = ap.base
    n, m = ap.n, ap.m
    if sol.artificial > 0:
        return Certificate("infeasible", aux=sol,
                           reason="auxiliary optimum uses the artificial variable")
    x = sol.x[:n] * ap.consts.W
    if probe_ray is not None:
        return Certificate("unbounded", x=x, ray=probe_ray, aux=sol,
                           objective=None, reason="descent ray found")
    if sol.y[m] != 0:
        raise RoundingFailed("bound constraint is active in the dual of a bounded problem")
    y = sol.y[:m]
    s = sol.s[:n]
    return Certificate("optimal", x=x, y=y, s=s, objective=base.c @ x, aux=sol)
