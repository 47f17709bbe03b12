from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given

from qubolin.catalog import (CatalogError, WeightMode, WeightSet, build, catalog,
                             expected_constraint_count, format_name, invalid_models, parse_name,
                             random_weights_for, required_weights, valid_models)
from qubolin.model import Tag, count_by_tag, count_general_constraints
from qubolin.qubo import fixture

from strategies import instances


def test_catalog_sizes():
    assert len(valid_models()) >= 28
    assert {m.name for m in invalid_models()} == {
        "DW(*,b)", "GW-HM", "FT(a,g,t=)", "ORDW-A", "ORDW-F", "ORPK(*,b)-RB", "PK(a)-NOUB"}
    assert all(m.known_invalid for m in invalid_models())
    assert not any(m.known_invalid for m in valid_models())


def test_names_round_trip():
    for mid in catalog():
        assert parse_name(format_name(mid)) == mid


def test_greek_and_star_spellings():
    assert parse_name("GW(α,γ+δ)") == parse_name("GW(a,g+d)")
    assert parse_name("PK(*,β)") == parse_name("PK(*,b)")


@pytest.mark.parametrize("bad", ["", "XX", "GW(", "GW(q)", "DW(a)-Z", "gw"])
def test_bad_names_rejected(bad):
    with pytest.raises(CatalogError):
        parse_name(bad)


def test_known_invalid_needs_flag():
    with pytest.raises(CatalogError):
        build(parse_name("DW(*,b)"), fixture("ex3"))
    build(parse_name("DW(*,b)"), fixture("ex3"), allow_invalid=True)


def test_asymmetric_needs_lp_study():
    with pytest.raises(CatalogError):
        build(parse_name("GW"), fixture("ex7"))
    m = build(parse_name("GW"), fixture("ex7"), lp_study=True)
    assert not m.integer_indices


def test_zero_weight_rejected_outside_lp_study():
    inst = fixture("ex2")
    w = WeightSet(WeightMode.CUSTOM, alpha={p: Fraction(0) for p in inst.sets.pairs()})
    with pytest.raises(CatalogError):
        build(parse_name("GW(a)"), inst, w)
    build(parse_name("GW(a)"), inst, w, lp_study=True)


def test_missing_weight_reported():
    inst = fixture("ex2")
    with pytest.raises(KeyError):
        build(parse_name("GW(a)"), inst, WeightSet(WeightMode.CUSTOM))


def test_basic_counts_on_ex2():
    inst = fixture("ex2")
    m = build(parse_name("GW"), inst)
    s = len(inst.sets.pairs())
    # one type-1 row and two type-2 rows per product variable
    assert count_by_tag(m)[Tag.TYPE1] == s
    assert count_by_tag(m)[Tag.TYPE2] == 2 * s
    assert count_general_constraints(m) == expected_constraint_count(parse_name("GW"), inst.sets)


@given(instances(n_min=2, n_max=7, lo=-3, hi=3))
def test_constraint_count_formula_matches_builder(inst):
    for mid in catalog():
        m = build(mid, inst, allow_invalid=True)
        assert count_general_constraints(m) == expected_constraint_count(mid, inst.sets), mid.name


def test_weights_json_round_trip():
    inst = fixture("ex2")
    rng = np.random.default_rng(1)
    for mid in valid_models():
        w = random_weights_for(mid, inst.sets, rng)
        assert WeightSet.from_jsonable(w.as_jsonable()) == w
        kinds = {k for k, _ in required_weights(mid, inst.sets)}
        for k in kinds:
            assert getattr(w, k)


def test_with_replacement_fixes_zeros():
    w = WeightSet(WeightMode.DUAL_EXACT, alpha={(0, 1): Fraction(0), (1, 0): Fraction(2)})
    r = w.with_replacement(1)
    assert r.mode is WeightMode.DUAL_MILP_SAFE
    assert r.alpha == {(0, 1): 1, (1, 0): 2}


def test_expand_emits_member_rows():
    inst = fixture("ex2")
    agg = build(parse_name("GW(a)"), inst)
    exp = build(parse_name("GW(a)"), inst, expand=True)
    assert count_general_constraints(agg) < count_general_constraints(exp)
    assert any(c.name.startswith("T1_") for c in exp.constraints)
    assert any(c.name.startswith("A1_") for c in agg.constraints)
