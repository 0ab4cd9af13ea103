from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from lindy.errors import ConfigError
from lindy.sparse import Enclosure, PContext, SparseVector, pairing

entries = st.dictionaries(st.integers(1, 40), st.fractions(-5, 5, max_denominator=50), max_size=12)


def test_norm_examples():
    half = PContext(0.5, exact=True)
    v = SparseVector({1: 1, 2: 1}, exact=True)
    assert v.power_sum(half) == 2
    assert v.p_norm(half) == 4
    assert SparseVector().p_norm(PContext(1.0)) == 0
    x1 = SparseVector({1: 1, 2: Fraction(-1, 2), 3: Fraction(-1, 2)}, exact=True)
    assert x1.p_norm(PContext(1.0, exact=True)) == 2


def test_sup_restrict_pairing_examples():
    assert SparseVector({1: 1}).sup_norm() == 1
    assert SparseVector({1: 1, 2: 0.5}).sup_norm() == 1
    assert SparseVector({1: -1, 2: 1, 3: -1}).sup_norm() == 1
    assert SparseVector({1: 1, 2: 1}).restrict({1}) == SparseVector({1: 1})
    assert pairing(SparseVector({1: 1, 2: Fraction(1, 2)}, True), SparseVector.unit(2, True)) == Fraction(1, 2)


def test_zero_entries_not_stored():
    v = SparseVector({1: 0, 2: 3})
    assert v.support == [2]
    assert not (v - v)


@given(entries, entries)
def test_p_triangle_inequality(a, b):
    for p in (1.0, 0.5, 1 / 3):
        ctx = PContext(p)
        u, v = SparseVector(a), SparseVector(b)
        assert (u + v).power_sum(ctx) <= u.power_sum(ctx) + v.power_sum(ctx) + 1e-12


@given(entries)
def test_exact_power_sum_encloses_float(a):
    for q in (1, 2, 3):
        exact = SparseVector(a, exact=True).power_sum(PContext(1 / q, exact=True))
        approx = oracles.power_sum(a.values(), 1 / q)
        assert isinstance(exact, Enclosure)
        assert exact.width < Fraction(1, 2**100) * (len(a) + 1)
        assert float(exact.lo) - 1e-12 <= approx <= float(exact.hi) + 1e-12


def test_perfect_powers_are_exact():
    ctx = PContext(0.5, exact=True)
    s = SparseVector({1: Fraction(1, 4), 2: Fraction(9, 16)}, exact=True).power_sum(ctx)
    assert s.exact and s == Fraction(1, 2) + Fraction(3, 4)
    s = SparseVector({1: 2}, exact=True).power_sum(ctx)
    assert not s.exact and s.lo**2 <= 2 <= s.hi**2


@given(entries)
def test_text_round_trip(a):
    v = SparseVector(a, exact=True)
    assert SparseVector.from_text(v.to_text(), exact=True) == v


def test_context_validation():
    with pytest.raises(ConfigError):
        PContext(0.0)
    with pytest.raises(ConfigError):
        PContext(1.5)
    with pytest.raises(ConfigError):
        PContext(0.7, exact=True)
    assert PContext.parse("1/3").q == 3
    assert PContext(0.5, exact=True).weight(3) == Fraction(1, 9)
    with pytest.raises(ValueError):
        SparseVector({0: 1})
