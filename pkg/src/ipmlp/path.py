"""Short-step path following.

Each iteration shrinks ``mu`` by a fixed factor and takes one Newton step
toward the new target.  The proximity measure

    sigma^2 = sum_i (x_i s_i / mu - 1)^2

is kept below ``rule.sigma_bound_sq`` at every iterate.  All comparisons are
done on squares so that rational runs never need a square root.

In rational mode the exact Newton iterates have denominators that grow
geometrically, so by default each step is snapped back to a dyadic grid
fine enough not to matter (see ``_lattice_step``); primal feasibility, dual
feasibility, the gap law ``c^T x - b^T y = n mu`` and the proximity bound
are then re-established or re-checked exactly.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import gmpy2
import numpy as np

from . import numerics
from .errors import InvariantBroken, IterationLimit, NotFeasible, PositivityLost
from .model import StandardLP, check_primal
from .newton import Iterate, apply_step, check_interior, solve_newton
from .numerics import mpq

DEFAULT_CHECK_INTERVAL = 16
DEFAULT_GUARD_BITS = 64
DEFAULT_MAX_ITERS = 10**6


def ceil_sqrt(n):
    r = math.isqrt(n)
    return r if r * r == n else r + 1


@dataclass(frozen=True)
class StepRule:
    variant: str  # "main" or "alternative"
    delta: object
    tau: Optional[object]
    sigma_bound: object
    sigma_bound_sq: object

    @property
    def shrink(self):
        """Fraction by which mu is reduced each iteration."""
        return self.delta if self.variant == "main" else self.tau

    @classmethod
    def main(cls, n_hat, exact=True):
        if exact:
            delta = mpq(1, 8 * ceil_sqrt(n_hat))
            return cls("main", delta, None, mpq(1, 2), mpq(1, 4))
        return cls("main", 1.0 / (8.0 * math.sqrt(n_hat)), None, 0.5, 0.25)

    @classmethod
    def alternative(cls, n_hat, delta=None, exact=True):
        if delta is None:
            delta = mpq(1, 8) if exact else 0.125
        if delta > mpq(1, 6) or delta <= 0:
            raise ValueError("alternative rule needs 0 < delta <= 1/6")
        if exact:
            delta = numerics.to_rational(delta)
            tau = delta / ceil_sqrt(n_hat)
            return cls("alternative", delta, tau, delta, delta * delta)
        delta = float(delta)
        return cls("alternative", delta, delta / math.sqrt(n_hat), delta, delta * delta)

    @classmethod
    def make(cls, variant, n_hat, exact=True, delta=None):
        if variant == "main":
            return cls.main(n_hat, exact)
        if variant in ("alternative", "alt"):
            return cls.alternative(n_hat, delta, exact)
        raise ValueError(f"unknown step rule {variant!r}")


@dataclass
class TraceRow:
    t: int
    mu: object
    sigma_sq: object
    gap: object
    min_xs: object
    max_xs: object


@dataclass
class Trace:
    rows: list = field(default_factory=list)
    exact: bool = False

    def __len__(self):
        return len(self.rows)

    @property
    def iterations(self):
        return self.rows[-1].t if self.rows else 0

    def as_dicts(self):
        keys = ("t", "mu", "sigma_sq", "gap", "min_xs", "max_xs")
        return [{k: getattr(r, k) for k in keys} for r in self.rows]


def sigma_sq(it: Iterate):
    """``sum_i (x_i s_i / mu - 1)^2`` (cached on the iterate)."""
    cached = it.__dict__.get("_sigma_sq")
    if cached is None:
        if numerics.backend_of(it.x).exact:
            num, den = _sigma_parts(it)
            cached = mpq(num, den)
        else:
            w = it.x * it.s / it.mu - 1.0
            cached = float(w @ w)
        it.__dict__["_sigma_sq"] = cached
    return cached


def _sigma_parts(it: Iterate):
    """Integers (num, den) with sigma^2 = num / den, built without gcds."""
    parts = it.__dict__.get("_sigma_parts")
    if parts is None:
        a, b = gmpy2.mpz(it.mu.numerator), gmpy2.mpz(it.mu.denominator)
        prods = [xi * si for xi, si in zip(it.x, it.s)]
        L = gmpy2.mpz(1)
        for p in prods:
            L = gmpy2.lcm(L, p.denominator)
        aL = a * L
        num = gmpy2.mpz(0)
        for p in prods:
            w = b * p.numerator * (L // p.denominator) - aL
            num += w * w
        parts = (num, aL * aL)
        it.__dict__["_sigma_parts"] = parts
    return parts


def sigma_sq_within(it: Iterate, bound_sq):
    """Whether ``sigma^2 <= bound_sq``; exact for rational iterates."""
    if not numerics.backend_of(it.x).exact:
        return sigma_sq(it) <= bound_sq
    num, den = _sigma_parts(it)
    bound_sq = mpq(bound_sq)
    return num * bound_sq.denominator <= bound_sq.numerator * den


def sigma_sq_float(it: Iterate):
    if not numerics.backend_of(it.x).exact:
        return sigma_sq(it)
    num, den = _sigma_parts(it)
    return _int_ratio_float(num, den)


def _int_ratio_float(num, den):
    if num == 0:
        return 0.0
    shift = int(gmpy2.bit_length(den)) - int(gmpy2.bit_length(abs(num))) + 64
    if shift >= 0:
        q = (num << shift) // den
    else:
        q = num // (den << -shift)
    return math.ldexp(float(q), -shift)


def sigma(it: Iterate):
    """Proximity measure; in rational mode the square is returned instead."""
    sq = sigma_sq(it)
    if numerics.backend_of(it.x).exact:
        return sq
    return math.sqrt(sq)


def iteration_bound(mu0, mu_target, shrink):
    """``ceil(ln(mu0/mu_target) / -ln(1 - shrink)) + 1``."""
    return math.ceil(log_ratio(mu0, mu_target) / -math.log1p(-float(shrink))) + 1


def log_ratio(a, b):
    """``ln(a/b)`` for positive scalars of either backend, without underflow."""
    return _log(a) - _log(b)


def _log(v):
    if isinstance(v, float):
        return math.log(v)
    v = numerics.to_rational(v)
    return math.log(int(v.numerator)) - math.log(int(v.denominator))


def _log2_floor(v):
    """An integer e with ``2^(e-1) <= v < 2^(e+1)`` for positive rational v."""
    return int(gmpy2.bit_length(v.numerator)) - int(gmpy2.bit_length(v.denominator))


def _snap(v, bits):
    """Round a rational to the nearest multiple of ``2^-bits``."""
    num = gmpy2.mpz(v.numerator) << bits
    den = gmpy2.mpz(v.denominator)
    return mpq(gmpy2.f_div(2 * num + den, 2 * den), gmpy2.mpz(1) << bits)


def _snap_vec(vec, bits):
    return np.array([_snap(v, bits) for v in vec], dtype=object)


def _snap_relative(v, guard):
    return _snap(v, max(guard - _log2_floor(v) + 1, 0))


class _Projector:
    """Exact orthogonal projection onto ``{x : A x = b}``."""

    def __init__(self, p: StandardLP):
        A = p.A
        m = p.m
        gram = A @ A.T
        if m:
            cols = [numerics.solve_unique(gram, np.array([mpq(int(i == j)) for i in range(m)],
                                                          dtype=object)) for j in range(m)]
            inv = np.array([[cols[j][i] for j in range(m)] for i in range(m)], dtype=object)
            self.G = A.T @ inv
        else:
            self.G = np.empty((p.n, 0), dtype=object)
        self.A = A
        self.b = p.b
        bb = p.b @ p.b if m else mpq(0)
        self.bb = bb
        self.Atb = A.T @ p.b
        # objective direction inside the null space, used when b = 0
        if m:
            w = p.c - self.G @ (A @ p.c)
        else:
            w = p.c.copy()
        self.w = w
        self.cw = p.c @ w if p.n else mpq(0)
        self.scale_bits = int(gmpy2.bit_length(gmpy2.mpz(int(
            math.ceil(float(numerics.max_abs(A)) + 1) * (p.n + 1)))))

    def onto_primal(self, x):
        if self.A.shape[0] == 0:
            return x
        r = self.A @ x - self.b
        if all(v == 0 for v in r):
            return x
        return x - self.G @ r


def _projector(p: StandardLP):
    proj = p.__dict__.get("_projector")
    if proj is None:
        proj = _Projector(p)
        p.__dict__["_projector"] = proj
    return proj


def _dyadic(num, den, bits):
    """``num/den`` (positive) truncated to ``bits`` significant bits, as a dyadic mpq."""
    shift = bits - (int(gmpy2.bit_length(num)) - int(gmpy2.bit_length(den)))
    if shift >= 0:
        return mpq((num << shift) // den, gmpy2.mpz(1) << shift)
    return mpq((num // (den << -shift)) << -shift)


def _lattice_step(p: StandardLP, it: Iterate, mu_prime, guard, repair_gap=True):
    """One Newton step with bounded-size rationals.

    The step is solved exactly for dyadic approximations (``guard``
    significant bits) of ``x/s``, ``1/s`` and ``mu_prime``.  The new ``x`` and
    ``y`` are rounded to an absolute grid finer than ``2^-guard`` times the
    smallest coordinate, ``x`` is projected back onto ``A x = b`` and, with
    ``repair_gap``, ``y`` is moved along ``b`` so that the gap equals
    ``n * mu_prime`` exactly.  ``s`` is recomputed as ``c - A^T y``.
    """
    proj = _projector(p)
    rel = guard + proj.scale_bits
    lo = min(_log2_floor(v) for v in it.x)
    lo = min(lo, min(_log2_floor(v) for v in it.s))
    bits = rel - lo + 3
    ratio = []
    inv_s = []
    for xi, si in zip(it.x, it.s):
        sn, sd = gmpy2.mpz(si.numerator), gmpy2.mpz(si.denominator)
        ratio.append(_dyadic(gmpy2.mpz(xi.numerator) * sd, gmpy2.mpz(xi.denominator) * sn, rel))
        inv_s.append(_dyadic(sd, sn, rel))
    ratio = np.array(ratio, dtype=object)
    inv_s = np.array(inv_s, dtype=object)
    mu_t = _dyadic(gmpy2.mpz(mu_prime.numerator), gmpy2.mpz(mu_prime.denominator), rel)
    k = numerics.solve_normal_equations(p.A, ratio, p.b - mu_t * (p.A @ inv_s))
    f = -(p.A.T @ k)
    x = proj.onto_primal(_snap_vec(mu_t * inv_s - ratio * f, bits))
    y = _snap_vec(it.y + k, bits)
    s = p.c - p.A.T @ y
    if repair_gap:
        target = p.n * mu_prime
        gap = p.c @ x - p.b @ y
        if gap != target:
            if proj.bb != 0:
                alpha = (gap - target) / proj.bb
                y = y + alpha * p.b
                s = s - alpha * proj.Atb
            elif proj.cw != 0:
                x = x + ((target - gap) / proj.cw) * proj.w
        new = Iterate(x, y, s, mu_prime)
        new.__dict__["_gap"] = target
        return new
    return Iterate(x, y, s, mu_prime)


def _acceptable(it, bound_sq):
    return (all(v > 0 for v in it.x) and all(v > 0 for v in it.s)
            and sigma_sq_within(it, bound_sq))


def advance(p: StandardLP, it: Iterate, rule: StepRule, *, check=True,
            exact_steps=False, guard_bits=DEFAULT_GUARD_BITS, repair_gap=True) -> Iterate:
    """Shrink mu once and re-center with a Newton step.

    Raises InvariantBroken when the incoming iterate violates the proximity
    bound or the outgoing one fails a post-check.
    """
    exact = p.backend.exact
    if not sigma_sq_within(it, rule.sigma_bound_sq):
        raise InvariantBroken("precondition", "sigma^2 above the rule's bound")
    mu_prime = (1 - rule.shrink) * it.mu
    new = None
    lattice = False
    if exact and not exact_steps:
        guard = guard_bits
        while guard <= 4 * guard_bits:
            cand = _lattice_step(p, it, mu_prime, guard, repair_gap)
            if _acceptable(cand, rule.sigma_bound_sq):
                new = cand
                lattice = True
                break
            guard *= 2
    if new is None:
        st = solve_newton(p, it, mu_prime)
        try:
            new = apply_step(it, st)
        except PositivityLost as exc:
            raise InvariantBroken("positivity", str(exc)) from exc
    if check:
        check_invariants(p, new, rule, gap_law=repair_gap or not lattice,
                         dual_by_construction=lattice)
    return new


def check_invariants(p: StandardLP, it: Iterate, rule: StepRule, gap_law=True,
                     dual_by_construction=False):
    """Assert feasibility, positivity, proximity and (exactly) the gap law.

    ``dual_by_construction`` skips the ``A^T y + s = c`` residual when ``s``
    was computed as ``c - A^T y``; positivity of ``s`` is still checked.
    """
    try:
        if dual_by_construction:
            check_primal(p, it.x, strict=True)
            if any(v <= 0 for v in it.s):
                raise NotFeasible("s not strictly positive")
        else:
            check_interior(p, it)
    except NotFeasible as exc:
        raise InvariantBroken("feasibility", str(exc)) from exc
    if not sigma_sq_within(it, rule.sigma_bound_sq):
        raise InvariantBroken("proximity", f"sigma^2 = {sigma_sq_float(it):.6g}")
    if gap_law and p.backend.exact:
        if p.c @ it.x - p.b @ it.y != p.n * it.mu:
            raise InvariantBroken("gap", "c^T x - b^T y != n mu")


def gap_of(p: StandardLP, it: Iterate):
    """``c^T x - b^T y``, cached on the iterate."""
    gap = it.__dict__.get("_gap")
    if gap is None:
        gap = p.c @ it.x - p.b @ it.y
        it.__dict__["_gap"] = gap
    return gap


def trace_row(p: StandardLP, it: Iterate, t, exact_record=False):
    xs = it.x * it.s
    gap = gap_of(p, it)
    if exact_record:
        return TraceRow(t, it.mu, sigma_sq(it), gap, min(xs), max(xs))
    xs = [_to_float(v) for v in xs]
    return TraceRow(t, _to_float(it.mu), sigma_sq_float(it), _to_float(gap), min(xs), max(xs))


def _to_float(v):
    try:
        return float(v)
    except OverflowError:
        return math.inf if v > 0 else -math.inf


@dataclass
class PathResult:
    final: Iterate
    trace: Trace


def follow_path(p: StandardLP, start: Iterate, rule: StepRule, mu_target, *,
                max_iters=DEFAULT_MAX_ITERS, check_every=DEFAULT_CHECK_INTERVAL,
                exact_steps=False, guard_bits=DEFAULT_GUARD_BITS, repair_gap=True,
                callback: Optional[Callable] = None, record_exact=False,
                strict=False) -> PathResult:
    """Advance from ``start`` until ``mu <= mu_target`` (``mu < mu_target`` if strict).

    Exact runs check every invariant after every step; float runs check
    every ``check_every`` steps.  ``callback(t, iterate)`` sees each new
    iterate.
    """
    exact = p.backend.exact
    trace = Trace(exact=exact and record_exact)
    it = start
    trace.rows.append(trace_row(p, it, 0, trace.exact))
    t = 0
    while it.mu > mu_target or (strict and it.mu == mu_target):
        if t >= max_iters:
            raise IterationLimit(f"mu target not reached after {max_iters} iterations")
        t += 1
        check = exact or (check_every and t % check_every == 0)
        it = advance(p, it, rule, check=check, exact_steps=exact_steps,
                     guard_bits=guard_bits, repair_gap=repair_gap)
        trace.rows.append(trace_row(p, it, t, trace.exact))
        if callback is not None:
            callback(t, it)
    return PathResult(it, trace)
