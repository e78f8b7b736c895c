import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cu_kit.core import INF, IncreasingSequence, constant_sequence
from cu_kit.instances import extrational_instance, extnat_instance
from cu_kit.limit import (
    CuDiagram,
    NotIncreasing,
    check_compatibility,
    decode_thread,
    embed,
    encode_thread,
    explicit_thread,
    is_rapid,
    limit_sup,
    matrix_diagram,
    mediating_map,
    rapid_representative,
    thread_add,
    thread_equiv,
    thread_leq,
    thread_way_below,
    zero_thread,
)
from cu_kit import af


@pytest.fixture(scope="module")
def uhf2():
    return matrix_diagram([1], [[[2]]], stationary=True, name="uhf2")


@pytest.fixture(scope="module")
def ident():
    return matrix_diagram([1], [[[1]]], stationary=True, name="identity")


def test_embed_expands_by_images(uhf2):
    assert embed(uhf2, 1, (1,)).entries(4) == [(1,), (2,), (4,), (8,)]


def test_embed_zero_is_zero(uhf2):
    assert thread_equiv(embed(uhf2, 3, (0,)), zero_thread(uhf2), 10).le


def test_embed_past_a_finite_diagram_fails():
    d = matrix_diagram([1, 1], [[[1]]], stationary=False)
    with pytest.raises(IndexError):
        embed(d, 3, (1,))


def test_thread_leq_examples(uhf2):
    assert thread_leq(embed(uhf2, 2, (1,)), embed(uhf2, 1, (1,)), 10).le
    v = thread_leq(embed(uhf2, 1, (1,)), embed(uhf2, 2, (1,)), 40)
    assert v.not_le and v.certificate == "perron"


def test_equivalence_examples(uhf2):
    x = embed(uhf2, 1, (1,))
    assert thread_equiv(x, explicit_thread(uhf2, 1, [(1,), (2,)]), 40).le
    assert thread_equiv(x, embed(uhf2, 2, (2,)), 40).le
    assert thread_equiv(x, embed(uhf2, 2, (1,)), 40).not_le


def test_prefix_must_increase(uhf2):
    with pytest.raises(ValueError):
        explicit_thread(uhf2, 1, [(3,), (5,)])


def test_rapid_of_compact_thread_is_itself(uhf2):
    x = embed(uhf2, 1, (3,))
    assert rapid_representative(x, 40) is x


def test_rapid_of_constant_inf_is_the_counting_thread(ident):
    r = rapid_representative(embed(ident, 1, (INF,)), 40)
    assert [v[0] for v in r.entries(6)] == [1, 2, 3, 4, 5, 6]
    assert is_rapid(r, 40)


def test_rapid_of_zero(uhf2):
    assert thread_equiv(rapid_representative(zero_thread(uhf2), 40), zero_thread(uhf2), 40).le


def test_sup_of_constant_sequence(uhf2):
    x = embed(uhf2, 2, (3,))
    assert thread_equiv(limit_sup(constant_sequence(x), 40), x, 40).le


def test_sup_of_growing_embeds_is_inf(uhf2):
    seq = IncreasingSequence(lambda n: embed(uhf2, 1, (n,)), unbounded=True)
    assert thread_equiv(limit_sup(seq, 40), embed(uhf2, 1, (INF,)), 40).le


def test_sup_of_two_comparable_threads(uhf2):
    lo, hi = embed(uhf2, 2, (1,)), embed(uhf2, 1, (1,))
    seq = IncreasingSequence(lambda n: lo if n == 1 else hi, stabilization_index=2)
    assert thread_equiv(limit_sup(seq, 40), hi, 40).le


def test_sup_rejects_a_decreasing_sequence(uhf2):
    hi, lo = embed(uhf2, 1, (1,)), embed(uhf2, 2, (1,))
    seq = IncreasingSequence(lambda n: hi if n == 1 else lo, stabilization_index=2)
    with pytest.raises(NotIncreasing):
        limit_sup(seq, 40)


def test_way_below_in_the_limit(uhf2):
    assert thread_way_below(embed(uhf2, 2, (1,)), embed(uhf2, 1, (1,)), 40).le
    inf = embed(uhf2, 1, (INF,))
    assert thread_way_below(inf, inf, 40).not_le
    assert thread_way_below(embed(uhf2, 1, (5,)), inf, 40).le


def test_thread_encoding_roundtrip(uhf2):
    fib = af.to_cu_diagram(af.load_fixture("fibonacci"))
    for d, text in ((uhf2, "@2:1"), (uhf2, "@1:1,3|tail"), (fib, "@1:1,0"), (fib, "@1:1,0;1,1|tail")):
        t = decode_thread(d, text)
        assert thread_equiv(decode_thread(d, encode_thread(t)), t, 20).le


def test_bad_thread_text(uhf2):
    for text in ("2:1", "@x:1", "@1:1,2,3;"):
        with pytest.raises((ValueError, IndexError)):
            decode_thread(uhf2, text)


def test_mediating_map_on_identity(ident):
    cone = af.identity_extnat_cone
    assert mediating_map(ident, extnat_instance(), cone, embed(ident, 2, (3,)), 40) == 3
    assert mediating_map(ident, extnat_instance(), cone, embed(ident, 1, (INF,)), 40) == INF


def test_incompatible_cone_is_detected(uhf2):
    bad = lambda i, v: v[0]  # noqa: E731 (ignores the doubling)
    res = check_compatibility(uhf2, bad, af.stage_element_sampler, 50, 0, extrational_instance())
    assert res.failures > 0


def test_compatible_cone(uhf2):
    res = check_compatibility(uhf2, af.uhf2_rational_cone, af.stage_element_sampler, 50, 0,
                              extrational_instance())
    assert res.failures == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_sampled_threads_are_reflexive_and_additive(seed):
    d = af.to_cu_diagram(af.load_fixture("fibonacci"))
    rng = random.Random(seed)
    a, b = af.sample_class(d, rng), af.sample_class(d, rng)
    assert thread_leq(a, a, 40).le
    assert thread_leq(a, thread_add(a, b), 40).le
    assert thread_leq(b, thread_add(a, b), 40).le


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_rapid_representative_is_equivalent_and_rapid(seed):
    d = af.to_cu_diagram(af.load_fixture("uhf6"))
    a = af.sample_class(d, random.Random(seed))
    r = rapid_representative(a, 40)
    assert thread_equiv(r, a, 40).le
    assert is_rapid(r, 40)


def test_diagram_shape_errors():
    from cu_kit.instances import MatrixCuMap, product_instance

    with pytest.raises(ValueError):
        CuDiagram((product_instance(1), product_instance(2)), (MatrixCuMap(((1,),)),))
    with pytest.raises(ValueError):
        CuDiagram((product_instance(1),), (), stationary=True)
