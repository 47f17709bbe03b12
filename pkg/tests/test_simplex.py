import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from qubolin.catalog import build, parse_name, valid_models
from qubolin.model import Constraint, MilpModel, Sense, Variable
from qubolin.qubo import fixture
from qubolin.simplex import LpStatus, extract_duals, lp_arrays, solve_arrays, solve_lp

from strategies import instances


def highs_max(m: MilpModel):
    arr = lp_arrays(m)
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for r, s in enumerate(arr.senses):
        row, rhs = arr.a[r], arr.b[r]
        if s is Sense.LE:
            a_ub.append(row); b_ub.append(rhs)
        elif s is Sense.GE:
            a_ub.append(-row); b_ub.append(-rhs)
        else:
            a_eq.append(row); b_eq.append(rhs)
    bounds = [(None if math.isinf(lo) else lo, None if math.isinf(hi) else hi)
              for lo, hi in zip(arr.lb, arr.ub)]
    res = linprog(-arr.c, A_ub=a_ub or None, b_ub=b_ub or None, A_eq=a_eq or None,
                  b_eq=b_eq or None, bounds=bounds, method="highs")
    return res


def _model(a, b, senses, c, lb, ub):
    vs = tuple(Variable(f"v{k}", lb[k], ub[k]) for k in range(len(c)))
    cons = tuple(Constraint(f"r{r}", tuple((k, Fraction(int(a[r][k]))) for k in range(len(c))
                                           if a[r][k]), senses[r], Fraction(int(b[r])))
                 for r in range(len(b)))
    return MilpModel(vs, cons, tuple((k, Fraction(int(c[k]))) for k in range(len(c))))


@st.composite
def small_lps(draw):
    n = draw(st.integers(1, 5))
    m = draw(st.integers(0, 5))
    ints = st.integers(-5, 5)
    a = [[draw(ints) for _ in range(n)] for _ in range(m)]
    b = [draw(st.integers(-5, 10)) for _ in range(m)]
    senses = [draw(st.sampled_from(list(Sense))) for _ in range(m)]
    c = [draw(ints) for _ in range(n)]
    lb, ub = [], []
    for _ in range(n):
        kind = draw(st.integers(0, 3))
        lo = draw(st.integers(-3, 1))
        hi = lo + draw(st.integers(0, 4))
        lb.append(-math.inf if kind == 0 else lo)
        ub.append(math.inf if kind == 1 else hi)
    return _model(a, b, senses, c, lb, ub)


@given(small_lps())
def test_random_lps_agree_with_highs(m):
    ours = solve_lp(m)
    ref = highs_max(m)
    if ref.status == 0:
        assert ours.status is LpStatus.OPTIMAL
        assert ours.objective == pytest.approx(-ref.fun, abs=1e-6)
        assert not m.violations(ours.x, tol=1e-7)
    elif ref.status == 2:
        assert ours.status is LpStatus.INFEASIBLE
    elif ref.status == 3:
        assert ours.status is LpStatus.UNBOUNDED


@given(instances(n_min=2, n_max=6))
def test_catalog_lps_agree_with_highs(inst):
    for mid in valid_models()[::5]:
        m = build(mid, inst, lp_study=True)
        ours = solve_lp(m)
        ref = highs_max(m)
        assert ref.status == 0
        assert ours.objective == pytest.approx(-ref.fun, abs=1e-6), mid.name


def test_strong_duality_and_dual_signs():
    m = build(parse_name("GW"), fixture("ex2"), lp_study=True)
    res = solve_lp(m)
    arr = lp_arrays(m)
    # with x in [0,1] and y >= 0, primal value <= b'y + sum of positive reduced costs at ub
    for r, s in enumerate(arr.senses):
        if s is Sense.LE:
            assert res.y[r] >= -1e-9
    d = arr.c - arr.a.T @ res.y
    bound_part = sum(d[k] * (arr.ub[k] if d[k] > 0 else arr.lb[k])
                     for k in range(len(d)) if abs(d[k]) > 1e-9)
    assert res.objective == pytest.approx(arr.b @ res.y + bound_part, abs=1e-7)


def test_infeasible_and_unbounded():
    m = _model([[1], [1]], [1, 2], [Sense.LE, Sense.GE], [1], [0], [math.inf])
    assert solve_lp(m).status is LpStatus.INFEASIBLE
    m = _model([[1, -1]], [1], [Sense.LE], [1, 1], [0, 0], [math.inf, math.inf])
    assert solve_lp(m).status is LpStatus.UNBOUNDED


def test_empty_model():
    m = _model([], [], [], [2, -1], [0, 0], [1, 1])
    res = solve_lp(m)
    assert res.objective == 2


def test_warm_start_matches_cold():
    m = build(parse_name("FT"), fixture("ex2"), lp_study=True)
    arr = lp_arrays(m)
    root, _ = solve_arrays(arr)
    lb, ub = arr.lb.copy(), arr.ub.copy()
    ub[0] = 0
    warm, _ = solve_arrays(arr, lb, ub, warm=root.basis)
    cold, _ = solve_arrays(arr, lb, ub)
    assert warm.objective == pytest.approx(cold.objective, abs=1e-9)


def test_extract_duals_groups_by_label():
    inst = fixture("ex2")
    res = solve_lp(build(parse_name("GW"), inst, lp_study=True))
    d = extract_duals(res)
    assert "T1" in d
    assert all(v >= -1e-9 for tab in d.values() for v in tab.values())


def test_deterministic_basis():
    m = build(parse_name("PK"), fixture("ex6b"), lp_study=True)
    assert solve_lp(m).basis_fingerprint == solve_lp(m).basis_fingerprint
