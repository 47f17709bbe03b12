import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qubolin.qubo import FIXTURES, QuboInstance, fixture, qubo_value, validate

from strategies import instances


def test_fixtures_are_valid():
    for name in FIXTURES:
        assert validate(fixture(name)) is None, name


def test_value_counts_both_orientations():
    inst = fixture("ex1")
    assert qubo_value(inst, (1, 1)) == 2
    assert qubo_value(inst, (1, 0)) == 0


def test_asymmetric_instance_needs_research_flag():
    with pytest.raises(ValueError):
        QuboInstance.from_lists([[0, 3], [-1, 0]], [0, 0])
    assert fixture("ex7").asymmetric


def test_nonzero_diagonal_rejected():
    with pytest.raises(ValueError):
        QuboInstance.from_lists([[1, 0], [0, 0]], [0, 0])


def test_non_binary_point_rejected():
    with pytest.raises(ValueError):
        qubo_value(fixture("ex1"), (2, 0))


def test_index_sets_follow_signs():
    sets = fixture("ex2").sets
    for i in range(4):
        assert set(sets.r[i]) == set(sets.r_plus[i]) | set(sets.r_minus[i])


@given(instances(n_max=5), st.permutations(range(5)))
def test_permutation_preserves_optimum(inst, perm):
    perm = [p for p in perm if p < inst.n]
    pi = inst.permute(perm)
    best = max(qubo_value(inst, x) for x in itertools.product((0, 1), repeat=inst.n))
    best_p = max(qubo_value(pi, x) for x in itertools.product((0, 1), repeat=inst.n))
    assert best == best_p


@given(instances(n_max=5))
def test_fingerprint_is_stable_and_data_sensitive(inst):
    again = QuboInstance.from_lists([list(r) for r in inst.q], list(inst.c))
    assert again.fingerprint == inst.fingerprint
    bumped = QuboInstance.from_lists([list(r) for r in inst.q], [v + 1 for v in inst.c])
    assert bumped.fingerprint != inst.fingerprint


def test_fraction_coefficients_exact():
    inst = QuboInstance.from_lists([[0, Fraction(1, 3)], [Fraction(1, 3), 0]], [0, 0])
    assert qubo_value(inst, (1, 1)) == Fraction(2, 3)
