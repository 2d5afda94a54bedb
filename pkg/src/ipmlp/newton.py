"""Newton step for the perturbed optimality conditions.

For an interior pair ``(x, y, s)`` and a target ``mu_prime`` the step
``(h, k, f)`` solves

    A h = 0,   A^T k + f = 0,   s_i h_i + x_i f_i = mu_prime - x_i s_i.

It is obtained from the normal equations
``(A diag(x/s) A^T) k = b - mu_prime * A (1/s)``, then ``f = -A^T k`` and
``h = -(x/s) f + mu_prime / s - x``.
"""

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import PositivityLost
from .model import DualSolution, StandardLP, check_dual, check_primal


@dataclass
class Iterate:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    mu: object

    @property
    def dual(self):
        return DualSolution(self.y, self.s)

    def products(self):
        return self.x * self.s


@dataclass
class NewtonStep:
    h: np.ndarray
    k: np.ndarray
    f: np.ndarray
    mu_prime: object


def check_interior(p: StandardLP, it: Iterate):
    """Primal and dual feasibility with strictly positive x and s."""
    check_primal(p, it.x, strict=True)
    check_dual(p, it.dual, strict=True)


def solve_newton(p: StandardLP, it: Iterate, mu_prime) -> NewtonStep:
    x, s = it.x, it.s
    ratio = x / s
    inv_s = 1 / s if numerics.backend_of(s).exact else 1.0 / s
    rhs = p.b - mu_prime * (p.A @ inv_s)
    k = numerics.solve_normal_equations(p.A, ratio, rhs)
    f = -(p.A.T @ k)
    h = -ratio * f + mu_prime * inv_s - x
    return NewtonStep(h, k, f, mu_prime)


def apply_step(it: Iterate, st: NewtonStep) -> Iterate:
    x = it.x + st.h
    s = it.s + st.f
    if any(v <= 0 for v in x) or any(v <= 0 for v in s):
        raise PositivityLost("step leaves the positive orthant")
    return Iterate(x, it.y + st.k, s, st.mu_prime)


def step_residuals(p: StandardLP, it: Iterate, st: NewtonStep):
    """Residuals of every identity the step must satisfy.

    Keys: ``primal`` (A h), ``dual`` (A^T k + f), ``centering``
    (s h + x f - mu' + x s), ``orthogonality`` (h^T f) and ``gap``
    ((x+h)^T (s+f) - n mu').
    """
    n = p.n
    return {
        "primal": p.A @ st.h,
        "dual": p.A.T @ st.k + st.f,
        "centering": it.s * st.h + it.x * st.f - st.mu_prime + it.x * it.s,
        "orthogonality": st.h @ st.f,
        "gap": (it.x + st.h) @ (it.s + st.f) - n * st.mu_prime,
    }


def relative_residuals(p: StandardLP, it: Iterate, st: NewtonStep):
    """Residuals of ``step_residuals`` relative to the size of iterate and step.

    Each residual is divided by the matching sum of absolute terms, with
    ``|x| + |h|`` and ``|s| + |f|`` as the scales of the primal and dual
    sides, so a step that is zero in exact arithmetic is not judged by its
    own rounding noise.
    """
    def f64(v):
        return np.asarray(v, dtype=float)

    def mx(v):
        return float(np.max(np.abs(f64(v)))) if np.size(v) else 0.0

    def ratio(num, den):
        return 0.0 if num == 0 else num / max(den, np.finfo(float).tiny)

    absA = np.abs(f64(p.A))
    h, k, f = f64(st.h), f64(st.k), f64(st.f)
    x, s = f64(it.x), f64(it.s)
    mu = float(st.mu_prime)
    xs_scale = np.abs(x) + np.abs(h)
    s_scale = np.abs(s) + np.abs(f)
    res = step_residuals(p, it, st)
    return {
        "primal": ratio(mx(res["primal"]), mx(absA @ xs_scale)),
        "dual": ratio(mx(res["dual"]), mx(absA.T @ np.abs(k) + s_scale)),
        "centering": ratio(mx(res["centering"]),
                           mx(np.abs(s * h) + np.abs(x * f) + mu + np.abs(x * s))),
        "orthogonality": ratio(abs(float(res["orthogonality"])), float(xs_scale @ s_scale)),
        "gap": ratio(abs(float(res["gap"])), float(xs_scale @ s_scale)),
    }
