"""End-to-end driver: general LP in, certificate (or approximate point) out."""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import numerics
from .auxiliary import AuxiliaryProblem, build_auxiliary, initial_iterate, probe_lp
from .errors import LPError, RoundingFailed
from .model import (DirectSolution, GeneralLP, InfeasibleEvidence, StandardLP,
                    integralize, preprocess, to_standard_form)
from .numerics import FLOAT, RATIONAL, mpq
from .path import (DEFAULT_CHECK_INTERVAL, DEFAULT_GUARD_BITS, DEFAULT_MAX_ITERS,
                   StepRule, Trace, follow_path, iteration_bound)
from .rounding import Certificate, classify, extract_optimal, split_support, verify_pair

FLOAT_RELATIVE_TARGET = 1e-8


@dataclass
class RunConfig:
    mode: str = "exact"
    rule: str = "main"
    mu_target: Optional[object] = None
    max_iters: int = DEFAULT_MAX_ITERS
    trace_path: Optional[str] = None
    check_interval: int = DEFAULT_CHECK_INTERVAL
    delta: Optional[object] = None
    guard_bits: int = DEFAULT_GUARD_BITS
    exact_steps: bool = False
    repair_gap: bool = True
    record_exact: bool = False
    callback: Optional[Callable] = None

    def __post_init__(self):
        if self.mode not in ("exact", "float"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.rule in ("alt", "alternative"):
            self.rule = "alternative"
        if self.rule not in ("main", "alternative"):
            raise ValueError(f"unknown step rule {self.rule!r}")

    @property
    def exact(self):
        return self.mode == "exact"


@dataclass
class PathInfo:
    """Bookkeeping of one path-following run on an auxiliary problem."""

    aux: AuxiliaryProblem
    rule: StepRule
    mu_start: object
    mu_target: object
    trace: Trace
    final: object = None

    @property
    def iterations(self):
        return self.trace.iterations

    @property
    def bound(self):
        return iteration_bound(self.mu_start, self.mu_target, self.rule.shrink)


@dataclass
class Approximate:
    """Float-mode output: an interior point of the auxiliary problem near the path."""

    x: np.ndarray        # original standard-form variables, W * x_aux[:n]
    aux_x: np.ndarray
    aux_y: np.ndarray
    aux_s: np.ndarray
    mu: float
    gap: float           # (n+2) mu, the auxiliary duality gap
    objective: float     # original objective sense


@dataclass
class RunResult:
    status: str          # optimal | infeasible | unbounded | approximate
    standard: StandardLP
    certificate: Optional[Certificate] = None
    approximate: Optional[Approximate] = None
    path: Optional[PathInfo] = None
    probe: Optional[PathInfo] = None
    extra: dict = field(default_factory=dict)

    @property
    def trace(self):
        return self.path.trace if self.path else None

    @property
    def objective(self):
        """Objective value in the sense of the input problem."""
        if self.certificate is not None and self.certificate.objective is not None:
            return self.standard.objective_sign * self.certificate.objective
        if self.approximate is not None:
            return self.approximate.objective
        return None


def _aux_path(p: StandardLP, config: RunConfig, exact: bool, mu_target=None,
              callback=None) -> PathInfo:
    ap = build_auxiliary(p, RATIONAL if exact else FLOAT)
    n_hat = ap.aux.n
    rule = StepRule.make(config.rule, n_hat, exact=exact, delta=config.delta)
    bound = None if rule.variant == "main" else rule.sigma_bound
    start = initial_iterate(ap, sigma_bound=bound)
    strict = exact and mu_target is None  # rounding needs mu strictly below mu_f
    if mu_target is None:
        mu_target = ap.consts.mu_f if exact else FLOAT_RELATIVE_TARGET * float(start.mu)
    mu_target = numerics.to_rational(mu_target) if exact else float(mu_target)
    res = follow_path(ap.aux, start, rule, mu_target, max_iters=config.max_iters,
                      check_every=config.check_interval, exact_steps=config.exact_steps,
                      guard_bits=config.guard_bits, repair_gap=config.repair_gap,
                      callback=callback, record_exact=config.record_exact, strict=strict)
    return PathInfo(ap, rule, start.mu, mu_target, res.trace, res.final)


def _solve_aux_exact(p: StandardLP, config: RunConfig, callback=None):
    info = _aux_path(p, config, exact=True, callback=callback)
    return _round(info)


def _round(info: PathInfo):
    sp = split_support(info.aux, info.final)
    sol = extract_optimal(info.aux, info.final, sp)
    return info, sp, sol


def _trivial(p: StandardLP):
    """Problems without equality rows: ``min c^T x, x >= 0``."""
    if all(v >= 0 for v in p.c):
        x = RATIONAL.zeros(p.n)
        return Certificate("optimal", x=x, y=RATIONAL.zeros(0), s=p.c.copy(), objective=mpq(0))
    j = next(j for j, v in enumerate(p.c) if v < 0)
    ray = RATIONAL.zeros(p.n)
    ray[j] = -1 / p.c[j]
    return Certificate("unbounded", x=RATIONAL.zeros(p.n), ray=ray, reason="descent ray found")


def find_ray(p: StandardLP, config: RunConfig):
    """A ray ``r >= 0`` with ``A r = 0`` and ``c^T r = -1``, or None.

    The probe problem is solved by the same exact pipeline (it is never
    unbounded, its objective being zero).
    """
    probe = probe_lp(p)
    pre = preprocess(probe)
    if isinstance(pre, InfeasibleEvidence):
        return None, None
    if isinstance(pre, DirectSolution):
        return (pre.x if pre.feasible else None), None
    info, _, sol = _solve_aux_exact(pre.lp, replace(config, mu_target=None, callback=None))
    if sol.artificial > 0:
        return None, info
    return sol.x[:probe.n] * info.aux.consts.W, info


def unboundedness_probe(p: StandardLP, config: RunConfig = None) -> bool:
    """True iff the integral problem ``p`` has a descent ray (so, if feasible, is unbounded)."""
    return find_ray(p, config or RunConfig())[0] is not None


def solve_standard(p: StandardLP, config: RunConfig = None, callback=None) -> RunResult:
    """Exact pipeline on integral standard-form data.

    The returned certificate refers to ``p`` itself; rows dropped by
    preprocessing get a zero dual.
    """
    config = config or RunConfig()
    pre = preprocess(p)
    if isinstance(pre, InfeasibleEvidence):
        return RunResult("infeasible", p, Certificate("infeasible", reason=pre.reason))
    lp = pre.lp
    kept = [p.rows.index(r) for r in lp.rows]

    def lift(y_red):
        y = RATIONAL.zeros(p.m)
        for i, v in zip(kept, y_red):
            y[i] = v
        return y

    if isinstance(pre, DirectSolution):
        if not pre.feasible:
            return RunResult("infeasible", p, Certificate(
                "infeasible", reason="the unique solution of the equality system has a negative entry"))
        y_red = numerics.solve_unique(lp.A.T, lp.c)
        y = lift(y_red)
        s = p.c - p.A.T @ y
        cert = Certificate("optimal", x=pre.x, y=y, s=s, objective=p.c @ pre.x,
                           reason="square full-rank system")
        verify_pair(p, cert.x, cert.y, cert.s)
        return RunResult("optimal", p, cert)
    if lp.m == 0:
        cert = _trivial(lp)
        if cert.y is not None:
            cert.y = lift(cert.y)
        return RunResult(cert.status, p, cert)

    info = _aux_path(lp, config, exact=True, mu_target=config.mu_target,
                     callback=callback or config.callback)
    if info.final.mu >= info.aux.consts.mu_f:
        # stopped early on request: report the exact interior point
        return RunResult("approximate", p, approximate=_approx_from(lp, info), path=info)
    info, sp, sol = _round(info)
    result = RunResult("", p, path=info)
    result.extra["split"] = sp
    ray = None
    # y_{m+1} = 0 makes y dual feasible for lp, which already proves boundedness
    if sol.artificial == 0 and sol.y[info.aux.y_extra_index] != 0:
        ray, result.probe = find_ray(lp, config)
        if ray is None:
            raise RoundingFailed("dual bound row is active but no descent ray exists")
    cert = classify(info.aux, sol, probe_ray=ray)
    if cert.y is not None:
        cert.y = lift(cert.y)
    if cert.status == "optimal":
        verify_pair(p, cert.x, cert.y, cert.s)
    result.status = cert.status
    result.certificate = cert
    return result


def _rescale(cert: Certificate, row_scale, obj_scale):
    """Map a certificate of the integralized problem back to the rational one."""
    if cert.y is not None:
        cert.y = row_scale * cert.y / obj_scale
    if cert.s is not None:
        cert.s = cert.s / obj_scale
    if cert.objective is not None:
        cert.objective = cert.objective / obj_scale
    if cert.ray is not None:
        cert.ray = cert.ray * obj_scale
    return cert


def _approximate(p: StandardLP, config: RunConfig, callback=None) -> RunResult:
    pre = preprocess(p)
    if isinstance(pre, InfeasibleEvidence):
        return RunResult("infeasible", p, Certificate("infeasible", reason=pre.reason))
    lp = pre.lp
    if isinstance(pre, DirectSolution) or lp.m == 0:
        # nothing to follow: answer exactly
        return solve_standard(p, config)
    info = _aux_path(lp, config, exact=False, mu_target=config.mu_target,
                     callback=callback or config.callback)
    return RunResult("approximate", p, approximate=_approx_from(lp, info), path=info)


def _approx_from(lp: StandardLP, info: PathInfo) -> Approximate:
    it = info.final
    n = lp.n
    exact = info.aux.aux.backend.exact
    W = info.aux.consts.W if exact else float(info.aux.consts.W)
    x = it.x[:n] * W
    c = lp.c if exact else FLOAT.convert(lp.c)
    return Approximate(x=x, aux_x=it.x, aux_y=it.y, aux_s=it.s, mu=it.mu,
                       gap=(n + 2) * it.mu, objective=lp.objective_sign * (c @ x))


def run(config: RunConfig, problem: GeneralLP) -> RunResult:
    """Standardize, then solve exactly or follow the path in floating point."""
    std = to_standard_form(problem, RATIONAL)
    scaled, row_scale, obj_scale = integralize(std)
    if config.exact:
        result = solve_standard(scaled, config)
        if result.certificate is not None:
            _rescale(result.certificate, row_scale, obj_scale)
    else:
        result = _approximate(scaled, config)
        if result.certificate is not None:
            _rescale(result.certificate, row_scale, obj_scale)
    if result.approximate is not None:
        a = result.approximate
        a.objective = a.objective / (obj_scale if config.exact else float(obj_scale))
    result.standard = std
    if result.certificate is not None and result.certificate.status == "optimal":
        verify_pair(std, result.certificate.x, result.certificate.y, result.certificate.s)
    if result.certificate is not None and result.certificate.status == "unbounded":
        verify_ray(std, result.certificate.x, result.certificate.ray)
    return result


def verify_ray(p: StandardLP, x, ray):
    """Exact check of an unboundedness certificate."""
    if any(v != 0 for v in p.A @ x - p.b) or any(v < 0 for v in x):
        raise LPError("certificate point is not feasible")
    if any(v != 0 for v in p.A @ ray) or any(v < 0 for v in ray):
        raise LPError("ray does not lie in the recession cone")
    if p.c @ ray != -1:
        raise LPError("ray is not a unit descent direction")


def verify_certificate(problem: GeneralLP, data: dict):
    """Re-check a certificate dictionary exactly against ``problem``.

    Returns the status on success and raises LPError otherwise.
    """
    std = to_standard_form(problem, RATIONAL)
    status = data.get("status")

    def vec(key, length):
        return _vec(data, key, length)

    if status == "optimal":
        x, y, s = vec("x", std.n), vec("y", std.m), vec("s", std.n)
        try:
            verify_pair(std, x, y, s)
        except RoundingFailed as exc:
            raise LPError(f"optimality check failed: {exc}") from exc
        if "objective" in data and std.objective_sign * (std.c @ x) != numerics.to_rational(data["objective"]):
            raise LPError("stated objective differs from c^T x")
    elif status == "unbounded":
        verify_ray(std, vec("x", std.n), vec("ray", std.n))
    elif status == "infeasible":
        scaled, _, _ = integralize(std)
        pre = preprocess(scaled)
        if "aux" in data:
            if isinstance(pre, (InfeasibleEvidence, DirectSolution)) or pre.lp.m == 0:
                raise LPError("auxiliary witness given for a problem without an auxiliary stage")
            ap = build_auxiliary(pre.lp)
            aux = data["aux"]
            n_hat = ap.aux.n
            x = _vec(aux, "x", n_hat)
            y, s = _vec(aux, "y", ap.aux.m), _vec(aux, "s", n_hat)
            try:
                verify_pair(ap.aux, x, y, s)
            except RoundingFailed as exc:
                raise LPError(f"auxiliary optimality check failed: {exc}") from exc
            if not x[-1] > 0:
                raise LPError("artificial variable is zero at the auxiliary optimum")
        elif isinstance(pre, InfeasibleEvidence):
            pass
        elif isinstance(pre, DirectSolution) and not pre.feasible:
            pass
        else:
            raise LPError("infeasibility certificate carries no witness")
    else:
        raise LPError(f"unknown certificate status {status!r}")
    return status


def _vec(d, key, length):
    if key not in d:
        raise LPError(f"certificate lacks {key!r}")
    v = np.array([numerics.to_rational(t) for t in d[key]], dtype=object)
    if len(v) != length:
        raise LPError(f"{key!r} has length {len(v)}, expected {length}")
    return v
