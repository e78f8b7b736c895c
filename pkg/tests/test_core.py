from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cu_kit.core import (
    INF,
    IncreasingSequence,
    UncertifiedSequence,
    check_laws,
    constant_sequence,
    decode_extnat,
    encode_extnat,
    extnat_add,
    extnat_basis,
    extnat_instance,
    extnat_sampler,
    extnat_sup,
    extnat_way_below,
    fin,
    first_failures,
    is_compact,
    report_passed,
)
from cu_kit.instances import extrational_instance, leq_as_way_below_instance, rational_sampler

extnat = st.one_of(st.integers(min_value=0, max_value=200), st.just(INF))


def test_addition_examples():
    assert extnat_add(2, 3) == 5
    assert extnat_add(2, INF) == INF
    assert extnat_add(0, INF) == INF


def test_way_below_examples():
    assert extnat_way_below(2, 3)
    assert not extnat_way_below(INF, INF)
    assert extnat_way_below(0, 0)


def test_sup_examples():
    assert extnat_sup(IncreasingSequence(lambda n: n, unbounded=True)) == INF
    assert extnat_sup(IncreasingSequence(lambda n: 1 if n == 1 else 4, stabilization_index=2)) == 4
    assert extnat_sup(constant_sequence(5)) == 5


def test_sup_needs_a_certificate():
    with pytest.raises(UncertifiedSequence):
        extnat_sup(IncreasingSequence(lambda n: n))


def test_compactness():
    assert is_compact(extnat_instance(), 7)
    assert not is_compact(extnat_instance(), INF)
    assert not is_compact(extrational_instance(), Fraction(1, 2))


def test_fin_rejects_bad_values():
    for bad in (-1, True, 1.5):
        with pytest.raises(ValueError):
            fin(bad)


def test_sequences_start_at_one():
    with pytest.raises(IndexError):
        constant_sequence(1)(0)


@given(extnat)
def test_encode_roundtrip(x):
    assert decode_extnat(encode_extnat(x)) == x


@given(extnat)
def test_basis_is_rapid_with_sup_x(x):
    b = extnat_basis(x)
    terms = [b(n) for n in range(1, 40)]
    assert all(extnat_way_below(s, t) for s, t in zip(terms, terms[1:]))
    assert extnat_sup(b) == x


@given(extnat, st.integers(min_value=0, max_value=250))
def test_basis_seek_matches_scan(x, t):
    b = extnat_basis(x)
    k = b.seek(t)
    scan = next((n for n in range(1, 300) if t <= b(n)), None)
    assert k == scan


def test_laws_pass_on_extnat_seed_7():
    res = check_laws(extnat_instance(), extnat_sampler, 1000, seed=7)
    assert report_passed(res), [r.to_json() for r in res if r.failures]


def test_laws_pass_on_extrational():
    assert report_passed(check_laws(extrational_instance(), rational_sampler, 1000, seed=0))


def test_negative_control_fails_l3_only():
    res = check_laws(leq_as_way_below_instance(), extnat_sampler, 300, seed=0)
    assert first_failures(res) == ["L3"]
    l3 = next(r for r in res if r.law == "L3")
    assert "inf" in l3.first_counterexample


def test_reports_are_deterministic():
    a = [r.to_json() for r in check_laws(extnat_instance(), extnat_sampler, 200, seed=3)]
    b = [r.to_json() for r in check_laws(extnat_instance(), extnat_sampler, 200, seed=3)]
    assert a == b


@settings(max_examples=50)
@given(extnat, extnat, extnat)
def test_addition_is_monotone(x, y, z):
    if x <= y:
        assert extnat_add(x, z) <= extnat_add(y, z)
