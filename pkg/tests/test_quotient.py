from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from lindy.basis import BasisContext, basis_vector
from lindy.indexing import DeltaSpec, IndexTables, parse_delta
from lindy.quotient import (
    IntervalTree,
    StepFunction,
    interval,
    level_partition_ok,
    q_map,
    step_p_norm,
    step_power_sum,
)
from lindy.sparse import PContext, SparseVector

F = Fraction
deltas = st.sampled_from(["const:2", "const:3", "list:3,2,5,2", "pow:0.5"])


def test_interval_examples():
    t = IndexTables(DeltaSpec.constant(2), 64)
    assert (interval(t, 1).left, interval(t, 1).right) == (0, 1)
    assert (interval(t, 2).left, interval(t, 2).right) == (0, F(1, 2))
    assert (interval(t, 3).left, interval(t, 3).right) == (F(1, 2), 1)
    i5 = interval(t, 5)
    assert (i5.left, i5.right) == (F(1, 4), F(1, 2))
    assert i5.path == ((1, 0), (2, 1))


def test_q_map_examples():
    t = IndexTables(DeltaSpec.constant(2), 64)
    one = PContext(1.0, exact=True)
    f = q_map(t, one, SparseVector.unit(1, True))
    assert f.pieces() == [(0, 1, 1)]
    assert step_p_norm(f, one)[1] == 1
    b = BasisContext.build("const:2", 1.0, 8, exact=True)
    assert q_map(t, one, basis_vector(b, 1)).is_zero


def test_step_norm_examples():
    one = PContext(1.0, exact=True)
    assert step_p_norm(StepFunction.from_pieces([(F(0), F(1), F(1))]), one)[1] == 1
    assert step_p_norm(StepFunction.from_pieces([(F(0), F(1, 2), F(2))]), one)[1] == 1
    assert step_p_norm(StepFunction.zero(), one)[1] == 0


@given(deltas, st.sampled_from([1.0, 0.5, 1 / 3]), st.integers(1, 120))
def test_kernel_exact(delta, p, k):
    b = BasisContext.build(delta, p, 120, exact=True)
    assert q_map(b.tables, b.ctx, basis_vector(b, k)).is_zero


@given(deltas, st.integers(0, 5))
def test_levels_tile(delta, n):
    t = IndexTables.covering(parse_delta(delta), 2000)
    if n < t.max_level:
        assert level_partition_ok(t, n)


@given(deltas, st.integers(0, 4), st.data())
def test_level_isometry_exact(delta, n, data):
    """Supported on one level, Q_p preserves the p-power sum exactly."""
    b = BasisContext.build(delta, 0.5, 600, exact=True)
    t = b.tables
    lo, hi = t.level_interval(n)
    if hi - 1 > t.max_index:
        return
    js = data.draw(st.lists(st.integers(lo, hi - 1), min_size=1, max_size=8, unique=True))
    # values are squares of rationals so that |v|^{1/2} is rational
    vals = data.draw(st.lists(st.fractions(-4, 4, max_denominator=9).filter(bool), min_size=len(js),
                              max_size=len(js)))
    v = SparseVector({j: x * abs(x) for j, x in zip(js, vals)}, True)
    s_q, s_v = step_power_sum(q_map(t, b.ctx, v), b.ctx), v.power_sum(b.ctx)
    assert s_q.exact and s_v.exact and s_q == s_v


@given(st.dictionaries(st.integers(1, 200), st.floats(-3, 3, allow_nan=False), max_size=10),
       st.sampled_from([1.0, 0.5, 0.7]))
def test_contraction_and_oracle(a, p):
    t = IndexTables(DeltaSpec.explicit([3, 2, 5, 2]), 400)
    ctx = PContext(p)
    v = SparseVector(a)
    f = q_map(t, ctx, v)
    tree = IntervalTree(t)
    pieces = [(*tree.bounds(j), x * float(tree.bounds(j)[1] - tree.bounds(j)[0]) ** (-1 / p)) for j, x in v.items()]
    s = step_power_sum(f, ctx)
    assert s == pytest.approx(oracles.step_integral_power(pieces, p), rel=1e-9, abs=1e-12)
    assert s <= v.power_sum(ctx) * (1 + 1e-9) + 1e-300


def test_csv_round_trip():
    f = StepFunction.from_pieces([(F(0), F(1, 3), F(2)), (F(1, 4), F(1), F(-1, 5))])
    assert StepFunction.from_csv(f.to_csv()) == f
    assert f(F(1, 5)) == 2 and f(F(1, 2)) == F(-1, 5)
    with pytest.raises(ValueError):
        f(F(1))


def test_adjacent_pieces_merge_and_cancel():
    f = StepFunction.from_pieces([(F(0), F(1, 2), 0.1), (F(1, 2), F(1), 0.1), (F(0), F(1), -0.1)])
    assert f.is_zero and len(f.values) == 1
