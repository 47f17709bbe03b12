import itertools
from fractions import Fraction

import pytest
from hypothesis import given

from qubolin.bnb import MilpStatus, solve_milp
from qubolin.catalog import WeightSet, build, parse_name
from qubolin.oracle import (CapExceeded, Verdict, WeightPolicy, brute_force_opt, check_precision,
                            counterexample_search, verify_model)
from qubolin.qubo import QuboInstance, fixture, qubo_value

from strategies import instances


@given(instances(n_min=1, n_max=8))
def test_brute_force_matches_naive_enumeration(inst):
    vals = {x: qubo_value(inst, x) for x in itertools.product((0, 1), repeat=inst.n)}
    best = max(vals.values())
    r = brute_force_opt(inst)
    assert r.value == best
    winners = {x for x, v in vals.items() if v == best}
    if r.truncated:
        assert len(r.argmax) == 64 and set(r.argmax) <= winners
    else:
        assert set(r.argmax) == winners


def test_brute_force_fractions_and_cap():
    inst = QuboInstance.from_lists([[0, Fraction(1, 3)], [Fraction(1, 3), 0]], [Fraction(-1, 2), 0])
    assert brute_force_opt(inst).value == Fraction(1, 6)
    big = QuboInstance.from_lists([[0] * 25 for _ in range(25)], [1] * 25)
    with pytest.raises(CapExceeded):
        brute_force_opt(big)


def test_paper_counterexample_verdicts():
    rep = verify_model(parse_name("DW(*,b)"), [fixture("ex3")])
    assert rep.verdict is Verdict.INVALID_WITNESS
    assert rep.witness.model_objective == pytest.approx(2) and rep.witness.true_optimum == 1
    assert "2 vs optimum 1" in rep.summary()


def test_valid_model_confirmed_and_invalid_never_confirmed():
    assert verify_model(parse_name("GW"), [fixture("ex2"), fixture("ex3")]).verdict is Verdict.VALID_CONFIRMED
    # ORDW-A fails only on specific data; on ex1 no witness, but it must not be confirmed
    assert verify_model(parse_name("ORDW-A"), [fixture("ex1")]).verdict is Verdict.INCONCLUSIVE


def test_hansen_meyer_invalid_on_both_variants():
    for fx in ("hm", "hm-c1"):
        rep = verify_model(parse_name("GW-HM"), [fixture(fx)])
        assert rep.verdict is Verdict.INVALID_WITNESS
    w = verify_model(parse_name("GW-HM"), [fixture("hm-c1")]).witness
    assert (round(w.model_objective), w.true_optimum) == (2, 1)


def test_equality_theta_aggregation_has_no_witness():
    rep = counterexample_search(parse_name("FT(a,g,t=)"), seed=1, max_instances=60,
                                policy=WeightPolicy.RANDOM)
    assert rep.verdict is Verdict.INCONCLUSIVE
    assert rep.witness is None


def test_search_finds_ordw_full_alpha_witness():
    rep = counterexample_search(parse_name("ORDW-F"), seed=0, max_instances=300)
    assert rep.verdict is Verdict.INVALID_WITNESS


ASYM_THETA_Q = [[0, -7, 1, -7], [-7, 0, -8, 7], [1, -8, 0, 7], [-7, 7, 7, 0]]
ASYM_THETA_C = [4, 9, 2, -8]
ASYM_THETA_W = {
    "mode": "custom",
    "alpha": {"1,2": "7", "1,3": "2", "1,4": "3", "2,1": "6", "2,3": "4", "2,4": "5",
              "3,1": "3", "3,2": "3", "3,4": "5", "4,1": "9", "4,2": "4", "4,3": "8"},
    "theta": {"1,2": "10", "1,3": "2", "1,4": "10", "2,1": "3", "2,3": "1", "2,4": "9",
              "3,1": "1", "3,2": "10", "3,4": "3", "4,1": "7", "4,2": "3", "4,3": "9"},
}


def test_asymmetric_theta_breaks_inequality_aggregation():
    inst = QuboInstance.from_lists(ASYM_THETA_Q, ASYM_THETA_C, name="asym-theta")
    w = WeightSet.from_jsonable(ASYM_THETA_W)
    r = solve_milp(build(parse_name("FT(a,t)"), inst, w), inst)
    assert r.status is MilpStatus.OPTIMAL
    assert brute_force_opt(inst).value == 15
    assert r.model_objective > 15 + 1
    # symmetric (unit) theta keeps the model exact
    assert solve_milp(build(parse_name("FT(a,t)"), inst), inst).model_objective == pytest.approx(15)


def test_precision_reports():
    assert check_precision(parse_name("GW"), fixture("ex2")).precise
    rep = check_precision(parse_name("ORDW"), fixture("ex1"))
    assert not rep.precise
    assert rep.x == (1, 1) and rep.model_value == pytest.approx(0) and rep.recomputed == 2
