import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from lindy import greedy as G
from lindy.basis import BasisContext, synthesize
from lindy.errors import DomainError
from lindy.sparse import SparseVector


@pytest.fixture(scope="module")
def classical():
    return BasisContext.build("const:2", 1.0, 4096)


def f13():
    return SparseVector({1: 1.0, 2: 0.3})


def test_greedy_projection_example(classical):
    out = G.greedy_projection(classical, f13(), 1)
    assert out.greedy_set == (1,)
    proj_ratio, res_ratio = out.ratios(1.0)
    assert res_ratio == pytest.approx(0.3)
    assert res_ratio <= G.qg_bounds(1.0)[0]


def test_greedy_projection_extremes(classical):
    a = f13()
    out = G.greedy_projection(classical, a, 0)
    assert not out.projection and out.residual == a
    out = G.greedy_projection(classical, a, 5)
    assert out.projection == a and not out.residual
    with pytest.raises(DomainError):
        G.greedy_projection(classical, a, -1)


def test_ties_go_to_lower_index():
    assert G.greedy_order(SparseVector({5: 1.0, 2: -1.0, 9: 0.5})) == [2, 5, 9]


def test_restricted_truncation(classical):
    assert G.restricted_truncation(classical, f13(), 2) == SparseVector({1: 0.3, 2: 0.3})
    a = SparseVector({3: -2.0, 7: 2.0, 1: 2.0})
    assert G.restricted_truncation(classical, a, 2) == SparseVector({1: 2.0, 3: -2.0})
    with pytest.raises(DomainError):
        G.restricted_truncation(classical, SparseVector(), 1)


def test_coordinate_projection(classical):
    a = f13()
    assert not G.coordinate_projection(classical, a, [])
    assert G.coordinate_projection(classical, a, [1, 2, 3]) == a
    s = G.coordinate_projection(classical, a, [2])
    assert s == SparseVector({2: 0.3})
    assert synthesize(classical, s).p_norm(classical.ctx) == pytest.approx(0.6)


def test_democracy_example(classical):
    assert G.sign_sum_norm(classical, np.array([1, 2]), np.ones(2)) == pytest.approx(3.0)
    lo, hi = G.democracy_bounds(1.0, 2)
    assert lo <= 3.0 <= hi


def test_singletons_have_norm_two_to_one_over_p():
    for p in (1.0, 0.5):
        b = BasisContext.build("list:2,3,4,5", p, 64)
        for k in (1, 7, 40):
            assert G.sign_sum_norm(b, np.array([k]), np.array([-1.0])) == pytest.approx(2 ** (1 / p))
    # the stated upper bound 2 m^{1/p} is below 2^{1/p} at m = 1 when p < 1
    assert G.democracy_bounds(0.5, 1)[1] < 2 ** (1 / 0.5)
    assert G.democracy_upper_ptriangle(0.5, 1) == pytest.approx(4.0)


def test_lebesgue_arithmetic():
    assert G.lebesgue_bounds(1.0, (1, 4), 4) == (1, pytest.approx(20.0))
    assert G.lebesgue_bounds(1.0, (1, 1), 1)[1] == pytest.approx(2.0)
    with pytest.raises(DomainError):
        G.lebesgue_bounds(1.0, (5, 4), 4)


def test_qg_bounds():
    assert G.qg_bounds(1.0) == (2.0, 3.0)
    res, proj = G.qg_bounds(0.5)
    assert res == 4.0 and proj == pytest.approx(min(9.0, 16 / 3))


@given(st.dictionaries(st.integers(1, 60), st.floats(-1, 1, allow_nan=False).filter(lambda x: abs(x) > 1e-6),
                       min_size=1, max_size=25),
       st.sampled_from([1.0, 0.5, 0.7]))
def test_profile_matches_dense_greedy(a, p):
    """Vectorized profile against full sorting plus dense synthesis."""
    bctx = BasisContext.build("list:3,2,5,2,4", p, 64)
    X = oracles.dense_basis(bctx.tables.delta.terms(70).tolist(), p, 64)
    idx = np.array(sorted(a), dtype=np.int64)
    vals = np.array([a[k] for k in idx])
    f, Gs, Rs = G.greedy_profile(bctx, idx, vals)

    def dense_power(keys):
        c = np.zeros(64)
        for k in keys:
            c[k - 1] = a[k]
        return oracles.power_sum(X @ c, p)

    assert f == pytest.approx(dense_power(a), rel=1e-10)
    for m in range(len(a) + 1):
        top = oracles.greedy_indices(a, m)
        rest = [k for k in a if k not in top]
        assert Gs[m] == pytest.approx(dense_power(top), rel=1e-9, abs=1e-12)
        assert Rs[m] == pytest.approx(dense_power(rest), rel=1e-9, abs=1e-12)


def test_single_vector_ratios_at_most_one(classical):
    for k in (1, 5, 100):
        for m in (0, 1):
            out = G.greedy_projection(classical, SparseVector({k: -0.7}), m)
            assert max(out.ratios(1.0)) <= 1.0


@pytest.mark.parametrize("delta,p", [("const:2", 1.0), ("list:2,3,4,5,6,7,8", 0.5), ("pow:0.5", 1 / 3)])
def test_quasi_greedy_scan_small(delta, p):
    bctx = BasisContext.build(delta, p, 256)
    res = G.quasi_greedy_scan(bctx, 200, 256, seed=3)
    assert [r.quantity for r in res] == ["residual_ratio", "projection_ratio"]
    assert all(r.passed for r in res)
    # the worst trial replays to the same ratio
    r = res[0]
    a = G.replay_trial(bctx, 256, 3, r.trial)
    out = G.greedy_projection(bctx, a, r.m)
    assert out.ratios(p)[1] == pytest.approx(r.worst, rel=1e-9)


def test_scan_is_deterministic():
    bctx = BasisContext.build("const:2", 0.5, 128)
    a = G.quasi_greedy_scan(bctx, 50, 128, seed=11)
    b = G.quasi_greedy_scan(bctx, 50, 128, seed=11)
    assert [(r.worst, r.trial, r.m) for r in a] == [(r.worst, r.trial, r.m) for r in b]
    with pytest.raises(DomainError):
        G.quasi_greedy_scan(bctx, 0, 128, seed=1)


def test_democracy_scan_rows():
    bctx = BasisContext.build("list:2,3,4,5,6,7", 0.5, 512)
    rows = G.democracy_scan(bctx, [1, 4, 16], 20, seed=1)
    for row in rows:
        assert row["min"] >= row["lower_bound"] * (1 - 1e-9)
        assert row["pass_ptriangle"]
    # p < 1: singleton sums exceed the stated upper bound
    assert not rows[0]["pass"]
    bctx = BasisContext.build("const:2", 1.0, 512)
    assert all(r["pass"] for r in G.democracy_scan(bctx, [1, 4, 16], 20, seed=1))


def test_truncation_and_nested_ratios(classical):
    r = G.truncation_scan(classical, 20, 64, 16, seed=2)
    assert r.passed and 0 < r.worst < math.inf
    A = np.array([1, 2, 3, 4])
    B_ = np.array([2, 3])
    signs = {1: 1.0, 2: -1.0, 3: 1.0, 4: 1.0}
    exact = G.succ_ratio(classical, A, B_, signs)
    assert G.nested_truncation_ratio(classical, A, B_, signs, eps=1e-12) == pytest.approx(exact, rel=1e-9)
