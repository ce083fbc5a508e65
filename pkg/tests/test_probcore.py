"""Distribution core: constructors, normalisation, expectation, posterior."""

from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from hyperflow.errors import NegativeWeight, WeightOverflow, ZeroCondition, ZeroWeight
from hyperflow.probcore import (
    FiniteDist,
    expected_value,
    mk_dist,
    normalize,
    posterior,
    rat_str,
)


def test_mk_dist_uniform():
    assert mk_dist([(0, F(1, 3)), (1, F(1, 3)), (2, F(1, 3))]) == FiniteDist.uniform([0, 1, 2])


def test_mk_dist_point():
    d = mk_dist([(5, F(1))])
    assert d == FiniteDist.point(5)
    assert d.is_full


def test_mk_dist_duplicates_add():
    assert mk_dist([(0, F(1, 4)), (0, F(1, 4))]) == mk_dist([(0, F(1, 2))])


def test_mk_dist_rejects_negative_and_overflow():
    with pytest.raises(NegativeWeight):
        mk_dist([(0, F(-1, 2))])
    with pytest.raises(WeightOverflow):
        mk_dist([(0, F(2, 3)), (1, F(2, 3))])


def test_zero_weights_dropped():
    d = mk_dist([(0, F(0)), (1, F(1, 2))])
    assert d.support == (1,)
    assert d.weight == F(1, 2)


def test_normalize_paper_example():
    assert normalize(mk_dist([(1, F(1, 3)), (3, F(1, 6))])) == mk_dist(
        [(1, F(2, 3)), (3, F(1, 3))]
    )


def test_normalize_full_is_identity():
    d = FiniteDist.uniform([0, 1])
    assert normalize(d) == d


def test_normalize_single_point_scaling():
    assert normalize(mk_dist([(0, F(1, 8))])) == FiniteDist.point(0)


def test_normalize_zero_weight_raises():
    with pytest.raises(ZeroWeight):
        normalize(FiniteDist([]))


def test_expected_value_scalar():
    d = FiniteDist.uniform([0, 1, 2])
    assert expected_value(d, lambda h: F(h, 2)) == F(1, 2)


def test_expected_value_constant_one_is_weight():
    d = FiniteDist.uniform([0, 1, 2])
    assert expected_value(d, lambda h: 1) == F(1)


def test_expected_value_boolean_coerced():
    d = FiniteDist.uniform([0, 1, 2])
    assert expected_value(d, lambda h: h > 0) == F(2, 3)


def test_expected_value_distribution_valued():
    # hand enumeration: 1/3*point(0) + 1/3*point(1) + 1/3*point(0)
    d = FiniteDist.uniform([0, 1, 2])
    out = expected_value(d, lambda h: FiniteDist.point(h % 2))
    assert out == mk_dist([(0, F(2, 3)), (1, F(1, 3))])


def test_posterior_paper_example():
    d = FiniteDist.uniform([0, 1, 2])
    assert posterior(d, lambda h: F(h, 2)) == mk_dist([(1, F(1, 3)), (2, F(2, 3))])


def test_posterior_vacuous():
    d = FiniteDist.uniform([0, 1, 2])
    assert posterior(d, lambda h: 1) == d


def test_posterior_boolean_restriction():
    d = FiniteDist.uniform([0, 1, 2])
    assert posterior(d, lambda h: h != 0) == FiniteDist.uniform([1, 2])


def test_posterior_zero_condition():
    d = FiniteDist.uniform([0, 1])
    with pytest.raises(ZeroCondition):
        posterior(d, lambda h: 0)


def test_rat_str_always_carries_denominator():
    assert rat_str(F(2, 3)) == "2/3"
    assert rat_str(F(1)) == "1/1"


weights = st.lists(
    st.tuples(st.integers(0, 5), st.fractions(min_value=0, max_value=F(1, 4))),
    min_size=1,
    max_size=4,
)


@given(weights)
def test_construction_canonical(pairs):
    d = mk_dist(pairs)
    assert all(w > 0 for _, w in d.items())
    assert 0 <= d.weight <= 1
    # entries sorted and unique
    points = [v for v, _ in d.items()]
    assert len(set(points)) == len(points)
    assert points == sorted(points)


@given(weights.filter(lambda ps: sum(w for _, w in ps) > 0))
def test_normalize_idempotent(pairs):
    d = mk_dist(pairs)
    assert normalize(normalize(d)) == normalize(d)


@given(weights.filter(lambda ps: sum(w for _, w in ps) > 0))
def test_posterior_support_shrinks(pairs):
    d = normalize(mk_dist(pairs))
    weight_fn = lambda v: F(1, 2) if v % 2 == 0 else F(0)
    if all(v % 2 == 1 for v in d.support):
        with pytest.raises(ZeroCondition):
            posterior(d, weight_fn)
        return
    post = posterior(d, weight_fn)
    assert set(post.support) <= {v for v in d.support if v % 2 == 0}


@given(weights.filter(lambda ps: sum(w for _, w in ps) > 0))
def test_expected_point_dists_preserve_weight(pairs):
    d = mk_dist(pairs)
    out = expected_value(d, lambda v: FiniteDist.point(v % 2))
    assert out.weight == d.weight
