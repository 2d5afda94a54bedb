import random
from itertools import combinations

import pytest

from ipmlp import numerics, oracle
from ipmlp.errors import NotFeasible, SingularSystem
from ipmlp.model import (Constraint, DirectSolution, DualSolution, GeneralLP, InfeasibleEvidence,
                         Reduced, duality_gap, integralize, preprocess, to_standard_form)
from ipmlp.numerics import RATIONAL, mpq

from lpgen import random_general, random_standard, standard


def V(vals):
    return RATIONAL.vector(vals)


class TestStandardForm:
    def test_max_with_slack(self):
        p = to_standard_form(GeneralLP("max", [2], [Constraint([1], "<=", 3)]))
        assert p.objective_sign == -1
        assert list(p.c) == [-2, 0]
        assert p.A.tolist() == [[1, 1]] and list(p.b) == [3]
        assert p.columns == [("var", 0), ("slack", 0)]

    def test_surplus(self):
        p = to_standard_form(GeneralLP("min", [1], [Constraint([1], ">=", 1)]))
        assert p.A.tolist() == [[1, -1]] and list(p.c) == [1, 0]
        assert p.columns[1] == ("surplus", 0)

    def test_equalities_unchanged(self):
        p = to_standard_form(GeneralLP("min", [-1, 0], [Constraint([1, 1], "=", 1)]))
        assert p.A.tolist() == [[1, 1]] and list(p.c) == [-1, 0] and p.objective_sign == 1
        assert p.U == 1

    def test_rejects_bad_sense(self):
        with pytest.raises(ValueError):
            Constraint([1], "<>", 1)


class TestPreprocess:
    def test_dependent_row_dropped(self):
        out = preprocess(standard([[1, 1], [2, 2]], [1, 2], [0, 0]))
        assert isinstance(out, Reduced)
        assert out.lp.A.tolist() == [[1, 1]] and list(out.lp.b) == [1]

    def test_inconsistent(self):
        assert isinstance(preprocess(standard([[1, 1], [2, 2]], [1, 3], [0, 0])), InfeasibleEvidence)

    def test_square_infeasible(self):
        out = preprocess(standard([[1, 0], [0, 1]], [2, -1], [0, 0]))
        assert isinstance(out, DirectSolution) and not out.feasible
        assert list(out.x) == [2, -1]

    def test_square_feasible(self):
        out = preprocess(standard([[1, 1], [1, -1]], [2, 0], [1, 1]))
        assert isinstance(out, DirectSolution) and out.feasible and list(out.x) == [1, 1]

    def test_feasible_set_preserved(self):
        rng = random.Random(5)
        for _ in range(25):
            p = random_standard(rng, m_max=3, n_max=5)
            A = p.A.tolist()
            # duplicate a combination of rows to force a dependency
            combo = [a + b for a, b in zip(A[0], A[-1])]
            q = standard(A + [combo], list(p.b) + [p.b[0] + p.b[-1]], list(p.c))
            out = preprocess(q)
            assert not isinstance(out, InfeasibleEvidence)
            lp = out.lp
            before = {tuple(v.x) for v in oracle.enumerate_vertices(q).vertices}
            after = {tuple(v.x) for v in oracle.enumerate_vertices(lp).vertices}
            assert before == after


class TestDualityGap:
    def setup_method(self):
        self.p = standard([[1, 1]], [1], [-1, 0])

    def test_interior_pair(self):
        gap = duality_gap(self.p, V([mpq(1, 2), mpq(1, 2)]), DualSolution(V([-2]), V([1, 2])))
        assert gap == mpq(3, 2)

    def test_optimal_pair(self):
        assert duality_gap(self.p, V([1, 0]), DualSolution(V([-1]), V([0, 1]))) == 0

    def test_infeasible_primal(self):
        with pytest.raises(NotFeasible):
            duality_gap(self.p, V([2, 0]), DualSolution(V([-1]), V([0, 1])))

    def test_weak_duality_sampled(self):
        rng = random.Random(9)
        for _ in range(200):
            x1 = mpq(rng.randint(0, 8), 8)
            y = mpq(-rng.randint(4, 16), 4)
            x = V([x1, 1 - x1])
            d = DualSolution(V([y]), self.p.c - self.p.A.T @ V([y]))
            gap = duality_gap(self.p, x, d)
            assert self.p.b @ d.y <= self.p.c @ x
            assert (gap == 0) == all(a * b == 0 for a, b in zip(x, d.s))


def test_integralize_scales_rows_and_objective():
    p = standard([[mpq(1, 2), mpq(1, 3)]], [mpq(5, 6)], [mpq(1, 4), 1])
    q, rows, obj = integralize(p)
    assert q.A.tolist() == [[3, 2]] and list(q.b) == [5]
    assert list(rows) == [6] and obj == 4 and list(q.c) == [1, 4]
    assert q.U == 5


def _general_optimum(p: GeneralLP):
    """Minimum over all basic points of the inequality system (independent of slacks)."""
    n = p.n
    rows = []
    for con in p.constraints:
        rows.append((list(con.coeffs), con.sense, con.rhs))
    for j in range(n):
        rows.append(([int(i == j) for i in range(n)], ">=", 0))
    best = None
    for active in combinations(range(len(rows)), n):
        G = RATIONAL.matrix([rows[i][0] for i in active], cols=n)
        try:
            x = numerics.solve_unique(G, RATIONAL.vector([rows[i][2] for i in active]))
        except SingularSystem:
            continue
        ok = True
        for a, sense, r in rows:
            lhs = sum(mpq(ai) * xi for ai, xi in zip(a, x))
            if (sense == "<=" and lhs > r) or (sense == ">=" and lhs < r) or (sense == "=" and lhs != r):
                ok = False
        if ok:
            val = sum(mpq(ci) * xi for ci, xi in zip(p.objective, x))
            if best is None or (val < best if p.sense == "min" else val > best):
                best = val
    return best


def test_standard_form_preserves_optimum():
    rng = random.Random(21)
    compared = 0
    for _ in range(60):
        g = random_general(rng)
        std = to_standard_form(g)
        res = oracle.classify(std)
        if res.status != "optimal":
            continue
        assert std.objective_sign * res.objective == _general_optimum(g)
        compared += 1
    assert compared >= 10
