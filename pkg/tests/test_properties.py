import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from marketeq.fisher import solve_fixed_items
from marketeq.lp import LE, LinearProgram, solve_lp
from marketeq.matching import apply_price_transform, perfect_utilities
from marketeq.model import (FisherMarket, MatchingMarket, PlcUtility,
                            best_bundle, best_value, eval_utility,
                            plc_to_cplc, v_max)
from marketeq.robust import perspective_robustify
from marketeq.verify import verify_fisher
from instances import linear_cplc
from oracles import highs_max

unit = st.floats(0.0, 1.0, allow_nan=False)
positive = st.floats(0.05, 1.0, allow_nan=False)


@st.composite
def plc(draw, m, max_pieces=3):
    k = draw(st.integers(1, max_pieces))
    a = draw(arrays(float, (k, m), elements=unit))
    beta = draw(arrays(float, k, elements=unit))
    beta[draw(st.integers(0, k - 1))] = 0.0
    return PlcUtility(a, beta)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_plc_is_concave_and_zero_at_origin(data):
    m = data.draw(st.integers(1, 3))
    u = plc_to_cplc(data.draw(plc(m)))
    x = data.draw(arrays(float, m, elements=unit))
    y = data.draw(arrays(float, m, elements=unit))
    assert eval_utility(u, np.zeros(m)) == pytest.approx(0, abs=1e-9)
    mid = eval_utility(u, (x + y) / 2)
    assert mid >= (eval_utility(u, x) + eval_utility(u, y)) / 2 - 1e-9


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_best_bundle_is_affordable_and_attains_value(data):
    m = data.draw(st.integers(1, 3))
    u = plc_to_cplc(data.draw(plc(m)))
    p = data.draw(arrays(float, m, elements=positive))
    w = data.draw(unit)
    v, x = best_bundle(u, p, w)
    assert p @ x <= w + 1e-7 and np.all(x >= -1e-9)
    assert eval_utility(u, x) == pytest.approx(v, abs=1e-7)
    assert v == pytest.approx(best_value(u, p, w), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_perspective_sandwich(data):
    m = data.draw(st.integers(1, 3))
    u = plc_to_cplc(data.draw(plc(m)))
    xi = data.draw(st.sampled_from([0.05, 0.25]))
    vm = v_max(u)
    if vm <= 1e-6:
        return
    r = perspective_robustify(u, xi, vm).utility
    x = data.draw(arrays(float, m, elements=unit))
    assert eval_utility(u, x) - 1e-6 <= eval_utility(r, x) <= \
        eval_utility(u, x) + xi + 1e-6


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_price_transform_keeps_demand(data):
    n = data.draw(st.integers(1, 3))
    m = data.draw(st.integers(n, 4))
    a = data.draw(arrays(float, (n, m), elements=unit))
    p = data.draw(arrays(float, m, elements=st.floats(0, 3)))
    p[data.draw(st.integers(0, m - 1))] = 0.0
    # r keeps every transformed price nonnegative
    rmax = 1.0 / max(1.0 - p.min(), 1e-9)
    r = data.draw(st.floats(0.05, min(rmax, 5.0)))
    mm = MatchingMarket([PlcUtility(row[None, :], [0]) for row in a], m)
    q = apply_price_transform(p, r)
    for u in perfect_utilities(mm):
        v, x = best_bundle(u, p, 1.0)
        assert best_value(u, q, 1.0) == pytest.approx(v, abs=1e-7)
        assert q @ x <= 1.0 + 1e-7
        assert eval_utility(u, x) == pytest.approx(v, abs=1e-7)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_lp_agrees_with_highs(data):
    n = data.draw(st.integers(1, 5))
    k = data.draw(st.integers(1, 5))
    A = data.draw(arrays(float, (k, n), elements=st.floats(-1, 1)))
    b = data.draw(arrays(float, k, elements=st.floats(0, 2)))
    c = data.draw(arrays(float, n, elements=st.floats(-1, 1)))
    A = np.vstack([A, np.ones(n)])
    b = np.r_[b, 3.0]
    out = solve_lp(LinearProgram(c=c, A=A, senses=[LE] * len(b), rhs=b))
    assert out.optimal
    assert out.objective == pytest.approx(highs_max(c, A, b), abs=1e-8)
    assert np.all(out.duals >= -1e-9)
    assert b @ out.duals == pytest.approx(out.objective, abs=1e-8)
    assert np.all(A.T @ out.duals >= c - 1e-8)


@settings(max_examples=8, deadline=None)
@given(arrays(float, (2, 2), elements=positive),
       arrays(float, 2, elements=st.floats(0.5, 1.5)))
def test_fixed_items_candidates_verify(q, w):
    mk = FisherMarket(w, [linear_cplc(row) for row in q], 2)
    c = solve_fixed_items(mk, 0.2, threads=1)
    assert verify_fisher(mk, c, c.sigma, c.lam, thrifty=c.thrifty).passed
