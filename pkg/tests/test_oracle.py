import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cu_kit import oracle
from cu_kit.oracle import (
    FiniteDimAlgebra,
    NumericalInstability,
    PositiveElement,
    WitnessError,
    cuntz_subeq,
    diag_element,
    direct_sum,
    eckart_young_bound,
    eps_cut,
    rank_vector,
    witness_construct,
    zero_element,
)


def test_eps_cut_example():
    cut = eps_cut(diag_element([1.0, 0.5, 0.2]), 0.3)
    assert np.allclose(np.sort(cut.spectra()[0])[::-1], [0.7, 0.2, 0.0])


def test_eps_cut_past_the_norm_is_zero():
    cut = eps_cut(diag_element([1.0, 0.5]), 2.0)
    assert rank_vector(cut) == (0,)


def test_eps_must_be_positive():
    with pytest.raises(ValueError):
        eps_cut(diag_element([1.0]), 0.0)


def test_rank_vector_examples():
    assert rank_vector(diag_element([1, 0.5], [0])) == (2, 0)
    assert rank_vector(zero_element(FiniteDimAlgebra((2, 3)))) == (0, 0)


def test_rank_vector_flags_eigenvalues_near_tol():
    a = diag_element([1.0, 5e-9])
    with pytest.raises(NumericalInstability):
        rank_vector(a, 1e-8)
    assert rank_vector(a, 1e-8, strict=False) == (1,)


def test_cuntz_subeq_examples():
    assert cuntz_subeq(diag_element([1, 0], [1, 1]), diag_element([1, 1], [1, 1]))
    assert not cuntz_subeq(diag_element([1, 1, 0], [0, 0, 0]), diag_element([1, 0, 0], [1, 1, 1]))
    a = diag_element([3, 2, 0])
    assert cuntz_subeq(a, a)


def test_witness_examples():
    w = witness_construct(diag_element([1, 0, 0]), diag_element([0, 5, 0]), 0.1)
    assert w.residual <= 1e-8
    a = diag_element([2.0, 1.0, 0.0])
    assert witness_construct(a, a, 0.1).residual <= 1e-8


def test_witness_rank_deficit_names_the_block():
    with pytest.raises(WitnessError, match="block 1"):
        witness_construct(diag_element([1], [1, 1]), diag_element([1], [1, 0]), 0.1)


def test_direct_sum_examples():
    rng = oracle.np_rng(0, "test", 0)
    alg = FiniteDimAlgebra((2, 3))
    a, b = oracle.random_positive(alg, rng), oracle.random_positive(alg, rng)
    assert rank_vector(direct_sum(a, b)) == tuple(x + y for x, y in zip(rank_vector(a), rank_vector(b)))
    z = zero_element(alg)
    assert rank_vector(direct_sum(a, z)) == rank_vector(a)
    assert rank_vector(direct_sum(z, z)) == (0, 0)


def test_elements_are_validated():
    with pytest.raises(ValueError):
        PositiveElement([np.ones((2, 3))])
    with pytest.raises(ValueError):
        PositiveElement([np.array([[1, 1], [0, 1]])])
    with pytest.raises(ValueError):
        PositiveElement([np.diag([1.0, -1.0])])
    with pytest.raises(ValueError):
        cuntz_subeq(diag_element([1]), diag_element([1, 1]))


def test_elements_are_read_only():
    a = diag_element([1.0, 2.0])
    with pytest.raises(ValueError):
        a.blocks[0][0, 0] = 5


def test_eckart_young_bounds_the_probe():
    a, b = diag_element([2.0, 1.0]), diag_element([1.0, 0.0])
    bound = eckart_young_bound(a, b, 0.1)
    assert bound == pytest.approx(0.9)
    # the truncated witness attains the bound; random candidates only go lower
    # through the Frobenius screen, which never drops below 1e-3 here
    best = oracle.falsification_probe(a, b, 0.1, 2000, np.random.default_rng(0))
    assert 1e-3 < best <= bound + 1e-9


def test_json_roundtrip():
    rng = oracle.np_rng(1, "json", 0)
    a = oracle.random_positive(FiniteDimAlgebra((2, 1)), rng)
    b = oracle.element_from_json(json.loads(json.dumps(oracle.element_to_json(a))))
    assert all(np.allclose(x, y) for x, y in zip(a.blocks, b.blocks))


def test_load_pairs_rejects_garbage():
    for text in ('{"pairs": 3}', '[]', '{"pairs": [[{"block_sizes": [2], "blocks": [[[1, 0]]]}, {}]]}'):
        with pytest.raises(ValueError):
            oracle.load_pairs(text)


def test_small_selftest_passes():
    res = oracle.oracle_agreement_check(20, seed=1, probe_candidates=2000)
    res += oracle.class_addition_check(20, seed=1) + oracle.eps_cut_checks(20, seed=1)
    assert all(r.passed for r in res), [r.to_json() for r in res if r.failures]


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_witness_is_sound_when_ranks_fit(seed):
    rng = np.random.default_rng(seed)
    alg = oracle.random_algebra(rng, max_size=4)
    a, b = oracle.random_positive(alg, rng), oracle.random_positive(alg, rng)
    eps = 0.05
    try:
        fits = cuntz_subeq(eps_cut(a, eps), b)
    except NumericalInstability:
        return
    if fits:
        assert witness_construct(a, b, eps).certified
    else:
        with pytest.raises(WitnessError):
            witness_construct(a, b, eps)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.floats(min_value=0.01, max_value=2.0))
def test_cutting_never_raises_rank(seed, eps):
    rng = np.random.default_rng(seed)
    a = oracle.random_positive(oracle.random_algebra(rng), rng)
    r0 = rank_vector(a, strict=False)
    r1 = rank_vector(eps_cut(a, eps), strict=False)
    assert all(x <= y for x, y in zip(r1, r0))
