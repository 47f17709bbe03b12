from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given

from qubolin.catalog import WeightMode, WeightSet, build, catalog, parse_name, random_weights_for
from qubolin.lpformat import (LpFormatError, export_lp, export_mps, format_number, import_lp,
                              import_mps)
from qubolin.qubo import fixture
from qubolin.simplex import solve_lp

from strategies import instances


def _same(a, b):
    assert [v.name for v in a.variables] == [v.name for v in b.variables]
    assert a.variables == b.variables
    assert [(c.name, c.sense, c.rhs) for c in a.constraints] == [
        (c.name, c.sense, c.rhs) for c in b.constraints]
    for ca, cb in zip(a.constraints, b.constraints):
        assert dict(ca.terms) == dict(cb.terms)
    assert dict(a.objective) == dict(b.objective)


@pytest.mark.parametrize("mid", catalog(), ids=lambda m: m.name)
def test_lp_and_mps_round_trip(mid):
    m = build(mid, fixture("ex2"), allow_invalid=True)
    _same(m, import_lp(export_lp(m)))
    _same(m, import_mps(export_mps(m)))
    assert export_lp(import_lp(export_lp(m))) == export_lp(m)


@given(instances(n_min=2, n_max=5))
def test_random_weights_survive_export(inst):
    rng = np.random.default_rng(inst.n)
    mid = parse_name("GW(a,g+d)")
    w = random_weights_for(mid, inst.sets, rng)
    w = WeightSet(WeightMode.CUSTOM, alpha={k: v / 3 for k, v in w.alpha.items()},
                  gamma=dict(w.gamma), delta=dict(w.delta))
    m = build(mid, inst, w, lp_study=True)
    direct = solve_lp(m).objective
    assert solve_lp(import_lp(export_lp(m))).objective == pytest.approx(direct, abs=1e-6)
    assert solve_lp(import_mps(export_mps(m))).objective == pytest.approx(direct, abs=1e-6)


def test_format_number():
    assert format_number(Fraction(1, 4)) == "0.25"
    assert format_number(Fraction(-3)) == "-3"
    assert float(format_number(Fraction(1, 3))) == pytest.approx(1 / 3)


def test_header_comments_carry_metadata():
    text = export_lp(build(parse_name("PK"), fixture("ex3")))
    assert text.startswith("\\ model: PK")
    assert "\\ fingerprint:" in text


def test_duplicate_row_reports_location():
    text = export_lp(build(parse_name("GW"), fixture("ex1")))
    lines = text.splitlines()
    k = next(i for i, ln in enumerate(lines) if ln.strip().startswith("T1_1_2"))
    lines.insert(k + 1, lines[k])
    with pytest.raises(LpFormatError) as e:
        import_lp("\n".join(lines))
    assert e.value.line == k + 2


def test_garbage_rejected():
    with pytest.raises(LpFormatError):
        import_lp("Maximize\n obj: 2 x +\nEnd\n")
    with pytest.raises(LpFormatError):
        import_mps("NAME x\nROWS\n Q bad\nENDATA\n")
