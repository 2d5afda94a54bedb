import math
import random

import pytest

from ipmlp import path
from ipmlp.auxiliary import build_auxiliary, initial_iterate
from ipmlp.errors import InvariantBroken, IterationLimit
from ipmlp.model import preprocess
from ipmlp.newton import Iterate
from ipmlp.numerics import FLOAT, RATIONAL, mpq
from ipmlp.path import StepRule, advance, check_invariants, follow_path, sigma, sigma_sq

from lpgen import running, standard


def V(vals):
    return RATIONAL.vector(vals)


class TestSigma:
    def test_centered(self):
        assert sigma(Iterate(V([1, 1]), V([]), V([2, 2]), mpq(2))) == 0

    def test_half(self):
        assert sigma_sq(Iterate(V([1, 2]), V([]), V([2, 1]), mpq(4))) == mpq(1, 2)

    def test_unit(self):
        assert sigma(Iterate(V([1, 1]), V([]), V([1, 1]), mpq(1))) == 0

    def test_float_returns_root(self):
        it = Iterate(FLOAT.vector([1, 2]), FLOAT.vector([]), FLOAT.vector([2, 1]), 4.0)
        assert sigma(it) == pytest.approx(math.sqrt(0.5), rel=1e-15)

    def test_within_matches_value(self):
        it = Iterate(V([1, 2]), V([]), V([2, 1]), mpq(4))
        assert path.sigma_sq_within(it, mpq(1, 2))
        assert not path.sigma_sq_within(it, mpq(1, 2) - mpq(1, 10**30))


class TestStepRule:
    def test_main_exact(self):
        r = StepRule.main(4)
        assert r.delta == mpq(1, 16) and r.sigma_bound_sq == mpq(1, 4) and r.shrink == r.delta

    def test_main_rounds_root_up(self):
        assert StepRule.main(5).delta == mpq(1, 24)

    def test_main_float(self):
        assert StepRule.main(5, exact=False).delta == pytest.approx(1 / (8 * math.sqrt(5)))

    def test_alternative(self):
        r = StepRule.alternative(9, mpq(1, 6))
        assert r.tau == mpq(1, 18) and r.sigma_bound == mpq(1, 6) and r.shrink == r.tau

    def test_alternative_rejects_large_delta(self):
        with pytest.raises(ValueError):
            StepRule.alternative(4, mpq(1, 5))


def _aux(p=None):
    ap = build_auxiliary(preprocess(p or running()).lp)
    return ap, initial_iterate(ap)


def _centered():
    """``min x1 + x2, x1 + x2 = 2`` at the exact centre for mu = 1."""
    p = standard([[1, 1]], [2], [1, 1])
    return p, Iterate(V([1, 1]), V([0]), V([1, 1]), mpq(1))


def test_centered_step_shrinks_gap_exactly():
    p, it = _centered()
    rule = StepRule.main(p.n)
    new = advance(p, it, rule)
    assert new.mu == (1 - rule.delta) * it.mu
    assert sigma_sq(new) <= mpq(1, 4)
    assert p.c @ new.x - p.b @ new.y == p.n * new.mu


def test_one_exact_step_on_running_example():
    ap, it = _aux()
    rule = StepRule.main(ap.aux.n)
    new = advance(ap.aux, it, rule)
    check_invariants(ap.aux, new, rule)
    assert new.mu == it.mu * (1 - rule.delta)


def test_pure_exact_step_also_valid():
    ap, it = _aux()
    rule = StepRule.main(ap.aux.n)
    new = advance(ap.aux, it, rule, exact_steps=True)
    check_invariants(ap.aux, new, rule)


def test_precondition_guard():
    p = standard([[1, 1]], [2], [1, 1])
    off = Iterate(V([mpq(1, 2), mpq(3, 2)]), V([0]), V([1, 1]), mpq(1, 2))
    assert sigma_sq(off) > mpq(1, 4)
    with pytest.raises(InvariantBroken) as info:
        advance(p, off, StepRule.main(2))
    assert info.value.which == "precondition"


def test_three_steps_for_three_factors():
    ap, it = _aux()
    rule = StepRule.main(ap.aux.n)
    res = follow_path(ap.aux, it, rule, it.mu * (1 - rule.delta) ** 3)
    assert res.trace.iterations == 3


def test_target_above_start_returns_at_once():
    ap, it = _aux()
    res = follow_path(ap.aux, it, StepRule.main(ap.aux.n), it.mu * 2)
    assert res.trace.iterations == 0 and res.final is it


def test_desk_count_for_million_ratio():
    ap, it = _aux()
    rule = StepRule.main(ap.aux.n)  # n_hat = 4, delta = 1/16
    assert rule.delta == mpq(1, 16)
    res = follow_path(ap.aux, it, rule, it.mu / 10**6)
    expected = math.ceil(math.log(10**6) / -math.log(1 - 1 / 16))
    assert res.trace.iterations == expected
    assert res.trace.iterations <= path.iteration_bound(it.mu, it.mu / 10**6, rule.shrink)


def test_iteration_limit():
    ap, it = _aux()
    with pytest.raises(IterationLimit):
        follow_path(ap.aux, it, StepRule.main(ap.aux.n), it.mu / 10**6, max_iters=5)


def test_exact_trace_laws():
    ap, it = _aux()
    rule = StepRule.main(ap.aux.n)
    n_hat = ap.aux.n
    res = follow_path(ap.aux, it, rule, it.mu / 10**4, record_exact=True)
    rows = res.trace.rows
    assert res.trace.exact
    for prev, row in zip(rows, rows[1:]):
        assert row.mu == (1 - rule.delta) * prev.mu
        assert row.gap == n_hat * row.mu
        assert row.sigma_sq <= mpq(1, 4)
        assert row.mu / 2 <= row.min_xs and row.max_xs <= 3 * row.mu / 2


def test_alternative_rule_keeps_tighter_bound():
    ap = build_auxiliary(preprocess(running()).lp)
    rule = StepRule.alternative(ap.aux.n, mpq(1, 8))
    it = initial_iterate(ap, sigma_bound=rule.sigma_bound)
    assert sigma_sq(it) <= rule.sigma_bound_sq
    seen = []
    follow_path(ap.aux, it, rule, it.mu / 10**4, callback=lambda t, x: seen.append(sigma_sq(x)))
    assert seen and max(seen) <= mpq(1, 64)


def test_float_path():
    ap = build_auxiliary(preprocess(running()).lp, FLOAT)
    it = initial_iterate(ap)
    rule = StepRule.main(ap.aux.n, exact=False)
    res = follow_path(ap.aux, it, rule, it.mu * 1e-8, check_every=1)
    assert res.final.mu <= it.mu * 1e-8
    gap = float(ap.aux.c @ res.final.x - ap.aux.b @ res.final.y)
    assert gap == pytest.approx(ap.aux.n * res.final.mu, rel=1e-6)


def test_random_small_runs_keep_invariants():
    rng = random.Random(4)
    for _ in range(3):
        A = [[rng.randint(-2, 2) for _ in range(3)]]
        if not any(A[0]):
            continue
        p = standard(A, [rng.randint(0, 2)], [rng.randint(-2, 2) for _ in range(3)])
        ap = build_auxiliary(preprocess(p).lp)
        it = initial_iterate(ap)
        rule = StepRule.main(ap.aux.n)
        worst = []
        follow_path(ap.aux, it, rule, it.mu / 10**5, callback=lambda t, x: worst.append(sigma_sq(x)))
        assert max(worst) <= mpq(1, 4)
