import io

import numpy as np
import pytest
from hypothesis import given

from qubolin.bnb import (EnumerationCapExceeded, FingerprintMismatch, MilpStatus,
                         feasible_integral_enumeration, solve_milp)
from qubolin.catalog import build, parse_name
from qubolin.oracle import brute_force_opt
from qubolin.qubo import fixture
from qubolin.simplex import solve_lp

from strategies import instances


@given(instances(n_min=1, n_max=6))
def test_gw_milp_matches_brute_force(inst):
    r = solve_milp(build(parse_name("GW"), inst), inst)
    opt = brute_force_opt(inst).value
    assert r.status is MilpStatus.OPTIMAL
    assert r.model_objective == pytest.approx(float(opt), abs=1e-6)
    assert r.recomputed_objective == opt


@given(instances(n_min=2, n_max=6))
def test_root_bound_dominates(inst):
    m = build(parse_name("DW"), inst)
    r = solve_milp(m, inst)
    assert solve_lp(m).objective >= r.model_objective - 1e-6
    assert r.best_bound >= r.model_objective - 1e-6


def test_forced_stop_reports_stale_objective():
    inst = fixture("ex1")
    m = build(parse_name("ORDW"), inst)
    log = io.StringIO()
    r = solve_milp(m, inst, start_x=(1, 1), stop_after_incumbents=1, progress=log)
    assert r.status is MilpStatus.FEASIBLE_TIMEOUT
    assert r.model_objective == 0 and r.recomputed_objective == 2
    assert "event=incumbent" in log.getvalue()
    full = solve_milp(m, inst)
    assert full.status is MilpStatus.OPTIMAL and full.model_objective == pytest.approx(2)


def test_node_limit_yields_partial_status():
    rng = np.random.default_rng(3)
    from conftest import symmetric_instance
    inst = symmetric_instance(rng, 9, -20, 20)
    r = solve_milp(build(parse_name("DW"), inst), inst, node_limit=2)
    assert r.status in (MilpStatus.FEASIBLE_TIMEOUT, MilpStatus.TIMEOUT, MilpStatus.OPTIMAL)
    if r.status is MilpStatus.FEASIBLE_TIMEOUT:
        assert r.gap >= -1e-6


def test_fingerprint_mismatch():
    with pytest.raises(FingerprintMismatch):
        solve_milp(build(parse_name("GW"), fixture("ex2")), fixture("ex3"))


def test_trivial_instance():
    from qubolin.qubo import QuboInstance
    inst = QuboInstance.from_lists([[0]], [5])
    r = solve_milp(build(parse_name("PK"), inst), inst)
    assert r.model_objective == 5 and r.nodes == 1


def test_enumeration_precise_and_cap():
    pts = feasible_integral_enumeration(build(parse_name("GW"), fixture("ex2")), fixture("ex2"))
    assert len(pts) == 16 and all(p.feasible and p.witness is None for p in pts)
    from qubolin.instances import random_suite
    big = next(i for i in random_suite() if i.n > 4)
    with pytest.raises(EnumerationCapExceeded):
        feasible_integral_enumeration(build(parse_name("GW"), big), big)
