import math

import pytest
from hypothesis import given

from qubolin.instances import (BalanceRule, GenerationExhausted, GeneratorConfig,
                               InstanceParseError, SYMMETRIC_FIXTURES, generate_balanced,
                               generate_uniform, gw_relaxation_x, is_balanced, load_canonical,
                               load_instance, builtin_fixtures, parse_orlib, random_suite,
                               save_canonical)
from qubolin.qubo import fixture, validate

from strategies import instances


def test_orlib_examples():
    (a,) = parse_orlib("1\n2 1\n1 2 5\n")
    assert a.n == 2 and a.q[0][1] == a.q[1][0] == 5 and list(a.c) == [0, 0]
    (b,) = parse_orlib("1\n2 1\n1 1 7\n")
    assert list(b.c) == [7, 0] and b.q[0][1] == 0
    assert parse_orlib("0\n") == []


def test_orlib_duplicates_accumulate_and_errors_locate():
    (a,) = parse_orlib("1\n3 3\n1 2 5\n2 1 1\n3 3 -2\n")
    assert a.q[0][1] == 6 and a.c[2] == -2
    with pytest.raises(InstanceParseError) as e:
        parse_orlib("1\n2 1\n1 3 5\n")
    assert e.value.line == 3
    with pytest.raises(InstanceParseError):
        parse_orlib("1\n2 2\n1 2 5\n")
    with pytest.raises(InstanceParseError):
        parse_orlib("1\n2 1\n1 x 5\n")


def test_orlib_to_canonical_identity():
    insts = parse_orlib("2\n3 2\n1 2 4\n2 3 -1\n2 1\n1 1 3\n")
    for inst in insts:
        back = load_canonical(save_canonical(inst))
        assert back.q == inst.q and back.c == inst.c


@given(instances(n_min=1, n_max=7))
def test_canonical_round_trip(inst):
    back = load_canonical(save_canonical(inst))
    assert back.q == inst.q and back.c == inst.c


def test_canonical_fixtures_including_asymmetric():
    for name in SYMMETRIC_FIXTURES + ("ex7",):
        inst = fixture(name)
        back = load_canonical(save_canonical(inst))
        assert (back.q, back.c, back.asymmetric) == (inst.q, inst.c, inst.asymmetric)


@pytest.mark.parametrize("text, line", [
    ("", 1), ("QUBO x\nc 1\n", 1), ("QUBO 2\nc 1\n", 2), ("QUBO 2\nc 1 2\n2 1 3\n", 3),
    ("QUBO 2\nc 1 2\n1 1 3\n", 3), ("QUBO 2\nc 1 2\n1 2\n", 3)])
def test_canonical_errors(text, line):
    with pytest.raises(InstanceParseError) as e:
        load_canonical(text)
    assert e.value.line == line


def test_load_instance_from_files(tmp_path):
    p = tmp_path / "a.txt"
    p.write_text(save_canonical(fixture("ex2")))
    assert load_instance(str(p)).q == fixture("ex2").q
    p.write_text("1\n2 1\n1 2 5\n")
    assert load_instance(str(p)).q[0][1] == 5
    assert load_instance("EX3").name == "ex3"


def test_balanced_generation_is_reproducible():
    cfg = GeneratorConfig(n=10, seed=5)
    inst, trace = generate_balanced(cfg)
    assert validate(inst) is None
    _, xs = gw_relaxation_x(inst)
    assert is_balanced(xs, BalanceRule.ALL_HALF)
    assert trace.rejections == trace.attempts - 1
    again, _ = generate_balanced(cfg)
    assert again.q == inst.q and again.c == inst.c
    for row in inst.q:
        assert all(-20 <= v <= 20 for v in row)
    assert all(-10 <= v <= 10 for v in inst.c)


def test_zero_matrix_exhausts_attempts():
    with pytest.raises(GenerationExhausted):
        generate_balanced(GeneratorConfig(n=3, q_range=(0, 0), max_attempts=5))


def test_half_integral_rule():
    assert is_balanced([0.5, 0, 1], BalanceRule.HALF_INTEGRAL_SET)
    assert not is_balanced([0, 1], BalanceRule.HALF_INTEGRAL_SET)
    assert not is_balanced([0.5, 0.3], BalanceRule.HALF_INTEGRAL_SET)


def test_generator_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig(n=1)
    with pytest.raises(ValueError):
        GeneratorConfig(n=3, c_range=(2, 1))


def test_uniform_density_is_structural():
    full = generate_uniform(4, density=1.0, seed=3)
    assert all(full.q[i][j] != 0 for i in range(4) for j in range(4) if i != j)
    n, d = 50, 0.1
    inst = generate_uniform(n, density=d, seed=9)
    pairs = n * (n - 1) // 2
    nz = sum(1 for i in range(n) for j in range(i + 1, n) if inst.q[i][j])
    sigma = math.sqrt(pairs * d * (1 - d))
    assert abs(nz - d * pairs) <= 3 * sigma
    assert generate_uniform(6, density=0.5, seed=1) == generate_uniform(6, density=0.5, seed=1)
    with pytest.raises(ValueError):
        generate_uniform(3, density=0)


def test_random_suite_shape():
    s = random_suite(2024)
    assert len(s) == 50 and all(4 <= i.n <= 10 for i in s)
    assert all(validate(i) is None for i in s)
    assert [i.fingerprint for i in s] == [i.fingerprint for i in random_suite(2024)]
    assert len(builtin_fixtures()) == len(SYMMETRIC_FIXTURES)
