import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cu_kit.core import INF, IncreasingSequence, case_rng, first_failures, report_passed
from cu_kit.instances import (
    MatrixCuMap,
    ZeroTimesInfBroken,
    check_morphism,
    decode_vector,
    encode_vector,
    identity_map,
    instance_by_name,
    make_vec_sup,
    product_instance,
    random_matrix_map,
    rat_basis,
    rat_sup,
    vec_basis,
    vec_way_below,
    vector_sampler,
)

coord = st.one_of(st.integers(min_value=0, max_value=30), st.just(INF))
vectors = st.lists(coord, min_size=1, max_size=4).map(tuple)


def test_matrix_map_examples():
    assert MatrixCuMap(((1, 1), (2, 0)))((1, INF)) == (INF, 2)
    assert identity_map(3)((4, INF, 0)) == (4, INF, 0)
    assert MatrixCuMap(((2,),))((3,)) == (6,)


def test_matrix_map_rejects_bad_shapes():
    with pytest.raises(ValueError):
        MatrixCuMap(((1, 2), (3,)))
    with pytest.raises(ValueError):
        MatrixCuMap(((-1,),))
    with pytest.raises(ValueError):
        MatrixCuMap(((1, 2),))((1,))


def test_vector_way_below_examples():
    assert vec_way_below((1, 2), (1, INF))
    assert not vec_way_below((1, INF), (1, INF))


def test_vector_sup_with_one_unbounded_coordinate():
    s = IncreasingSequence(lambda n: (n, 1, 0), stabilization_index=2, unbounded=(True, False, False))
    assert make_vec_sup(3)(s) == (INF, 1, 0)


def test_instance_names():
    assert instance_by_name("extnat^3").dim == 3
    assert instance_by_name("ExtRational").name == "extrational"
    for bad in ("bogus", "extnat^0", "extnat^x"):
        with pytest.raises(KeyError):
            instance_by_name(bad)


def test_rational_basis_converges_to_x():
    from fractions import Fraction

    b = rat_basis(Fraction(1, 2))
    assert rat_sup(b) == Fraction(1, 2)
    assert all(b(n) < Fraction(1, 2) for n in range(1, 30))


@given(vectors)
def test_vector_encoding_roundtrip(v):
    assert decode_vector(encode_vector(v), len(v)) == v


@given(vectors, st.data())
def test_vector_seek_matches_scan(x, data):
    t = tuple(data.draw(st.integers(min_value=0, max_value=35)) for _ in x)
    b = vec_basis(x)
    scan = next((n for n in range(1, 80) if all(u <= c for u, c in zip(t, b(n)))), None)
    assert b.seek(t) == scan


@given(vectors)
def test_vector_basis_sup(x):
    assert make_vec_sup(len(x))(vec_basis(x)) == x


def test_scalar_doubling_map_is_a_morphism():
    assert report_passed(check_morphism(MatrixCuMap(((2,),)), vector_sampler(1), 500, seed=0))


def test_zero_map_is_a_morphism():
    m = MatrixCuMap(((0, 0), (0, 0)))
    assert report_passed(check_morphism(m, vector_sampler(2), 300, seed=0))


def test_broken_zero_times_inf_fails_way_below():
    res = check_morphism(ZeroTimesInfBroken(((1, 1),)), vector_sampler(2), 300, seed=0)
    assert "way_below" in first_failures(res)


def test_random_maps_respect_bounds():
    rng = random.Random(5)
    for _ in range(100):
        m = random_matrix_map(rng)
        assert 1 <= m.k_in <= 4 and 1 <= m.k_out <= 4
        assert all(0 <= e <= 5 for row in m.matrix for e in row)


def test_random_maps_are_morphisms():
    for k in range(30):
        m = random_matrix_map(case_rng(0, "maps", k))
        assert report_passed(check_morphism(m, vector_sampler(m.k_in), 40, seed=k))


def test_product_instance_rejects_zero_dimension():
    with pytest.raises(ValueError):
        product_instance(0)
