import numpy as np
import pytest

import marketeq.lp as lp_mod
from marketeq.lp import (EQ, GE, LE, LinearProgram, MalformedProgram,
                         NumericalStall, Status, check_feasible, solve_lp)
from oracles import highs_max, vertex_optimum


def prog(c, A, senses, rhs, **kw):
    return LinearProgram(c=np.asarray(c, float), A=np.asarray(A, float),
                         senses=senses, rhs=np.asarray(rhs, float), **kw)


def test_single_bound():
    out = solve_lp(prog([1], [[1]], [LE], [1]))
    assert out.status is Status.OPTIMAL
    assert out.objective == pytest.approx(1.0)
    assert out.x == pytest.approx([1.0])


def test_contradictory_bound_is_infeasible():
    assert solve_lp(prog([1], [[1]], [LE], [-1])).status is Status.INFEASIBLE


def test_two_variable_vertex():
    # vertex enumeration oracle: (0,0), (1,0), (1,1), (0,2) -> best 4 at (1,1)
    out = solve_lp(prog([3, 1], [[1, 1], [1, 0]], [LE, LE], [2, 1]))
    assert out.objective == pytest.approx(4.0)
    assert out.x == pytest.approx([1.0, 1.0])
    assert vertex_optimum(np.array([3., 1.]), np.array([[1., 1.], [1., 0.]]),
                          np.array([2., 1.])) == pytest.approx(4.0)


def test_unbounded():
    out = solve_lp(prog([1, 1], [[1, -1]], [LE], [1]))
    assert out.status is Status.UNBOUNDED


def test_minimize_with_ge_rows():
    out = solve_lp(prog([2, 3], [[1, 1], [1, 0]], [GE, GE], [4, 1],
                        maximize=False))
    assert out.objective == pytest.approx(8.0)
    assert out.x == pytest.approx([4.0, 0.0])


def test_free_variable():
    # max -t s.t. t >= -3 with t free -> t = -3
    out = solve_lp(prog([-1], [[1]], [GE], [-3], free=np.array([True])))
    assert out.x == pytest.approx([-3.0])
    assert out.objective == pytest.approx(3.0)


def test_feasibility_examples():
    out = check_feasible(prog([0, 0], [[1, 1]], [EQ], [1]))
    assert out.optimal
    assert out.x.sum() == pytest.approx(1.0)
    assert np.all(out.x >= 0)
    assert not check_feasible(prog([0], [[1], [1]], [GE, LE], [2, 1])).optimal


def test_duals_reproduce_objective():
    out = solve_lp(prog([3, 1], [[1, 1], [1, 0]], [LE, LE], [2, 1]))
    assert np.dot([2, 1], out.duals) == pytest.approx(out.objective)
    assert out.duals == pytest.approx([1.0, 2.0])


def test_malformed_programs():
    with pytest.raises(MalformedProgram):
        solve_lp(prog([1, 1], [[1]], [LE], [1]))
    with pytest.raises(MalformedProgram):
        solve_lp(prog([1], [[1]], ["<"], [1]))
    with pytest.raises(MalformedProgram):
        solve_lp(prog([1], [[np.inf]], [LE], [1]))
    with pytest.raises(MalformedProgram):
        solve_lp(prog([1], [[1]], [LE, LE], [1]))


def test_iteration_cap_raises(monkeypatch):
    monkeypatch.setattr(lp_mod, "MAX_ITER", 1)
    with pytest.raises(NumericalStall):
        solve_lp(prog([1, 1, 1], [[1, 2, 3], [3, 2, 1]], [LE, LE], [4, 4]))


def test_beale_cycling_example_terminates():
    # classic instance on which textbook Dantzig pricing cycles
    c = [0.75, -150, 0.02, -6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    out = solve_lp(prog(c, A, [LE] * 3, [0, 0, 1]))
    assert out.optimal
    assert out.objective == pytest.approx(0.05)


def test_rounding_noise_row_is_not_amplified():
    # 0 @ x <= 1 written with 1e-16 noise must not loosen the other rows
    A = [[1.0, 0.0], [4e-16, -3e-16]]
    out = check_feasible(prog([0, 0], A + [[1.0, 1.0]], [GE, LE, LE],
                              [2.0, 5.0, 1.0]))
    assert out.status is Status.INFEASIBLE


def test_empty_rows_decided_directly():
    assert not check_feasible(prog([0], [[0.0]], [EQ], [1.0])).optimal
    out = solve_lp(prog([1], [[0.0], [1.0]], [LE, LE], [1.0, 2.0]))
    assert out.objective == pytest.approx(2.0)
    assert out.duals[0] == 0.0


def _random_bounded_lp(rng, n, k):
    A = rng.uniform(-1, 1, (k, n)).round(2)
    b = rng.uniform(0.1, 2, k).round(2)
    # a positive row keeps the feasible region bounded
    A = np.vstack([A, rng.uniform(0.2, 1, n).round(2)])
    b = np.r_[b, rng.uniform(1, 3)]
    c = rng.uniform(-1, 1, n).round(2)
    return c, A, b


def test_matches_vertex_enumeration():
    rng = np.random.default_rng(11)
    for _ in range(150):
        n = int(rng.integers(1, 5))
        c, A, b = _random_bounded_lp(rng, n, int(rng.integers(1, 5)))
        expected = vertex_optimum(c, A, b)
        out = solve_lp(prog(c, A, [LE] * len(b), b))
        assert out.optimal
        assert out.objective == pytest.approx(expected, abs=1e-8)


def test_infeasible_agrees_with_highs():
    rng = np.random.default_rng(5)
    seen = 0
    for _ in range(200):
        n = int(rng.integers(1, 5))
        A = rng.uniform(-1, 1, (3, n)).round(2)
        b = rng.uniform(-1, 1, 3).round(2)
        ref = highs_max(np.zeros(n), A, b)
        out = check_feasible(prog(np.zeros(n), A, [LE] * 3, b))
        assert out.optimal == (ref is not None)
        seen += ref is None
    assert seen > 0


def test_mixed_senses_against_highs():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n, k = int(rng.integers(2, 7)), int(rng.integers(1, 6))
        c, A, b = _random_bounded_lp(rng, n, k)
        senses = [LE] * len(b)
        eq = int(rng.integers(len(b) - 1)) if len(b) > 1 else None
        A_eq = b_eq = None
        A_ub, b_ub = A, b
        if eq is not None:
            senses[eq] = EQ
            b = b.copy()
            b[eq] = 0.5 * b[eq]
            A_eq, b_eq = A[[eq]], b[[eq]]
            keep = [i for i in range(len(b)) if i != eq]
            A_ub, b_ub = A[keep], b[keep]
        ref = highs_max(c, A_ub, b_ub, A_eq, b_eq)
        out = solve_lp(prog(c, A, senses, b))
        if ref is None:
            assert not out.optimal
        else:
            assert out.objective == pytest.approx(ref, abs=1e-7)


def test_deterministic():
    rng = np.random.default_rng(1)
    c, A, b = _random_bounded_lp(rng, 6, 5)
    a = solve_lp(prog(c, A, [LE] * len(b), b))
    z = solve_lp(prog(c, A, [LE] * len(b), b))
    assert np.array_equal(a.x, z.x) and np.array_equal(a.duals, z.duals)
