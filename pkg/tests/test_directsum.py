from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lindy import directsum as D
from lindy.basis import BasisContext, synthesize
from lindy.errors import ConfigError, DomainError
from lindy.greedy import greedy_projection, trial_rng
from lindy.sparse import SparseVector


@pytest.fixture(scope="module")
def bctx():
    return BasisContext.build("const:2", 1.0, 256)


def test_layout_indexing():
    lay = D.BlockLayout((2, 4, 8))
    assert lay.offsets == (0, 2, 6, 14) and lay.size == 14 and lay.nondecreasing
    assert lay.locate(1) == (0, 1) and lay.locate(3) == (1, 1) and lay.locate(14) == (2, 8)
    assert all(lay.glob(*lay.locate(g)) == g for g in range(1, 15))
    parts = lay.split(SparseVector({1: 1.0, 6: 2.0, 7: 3.0}))
    assert parts[0] == SparseVector({1: 1.0}) and parts[1] == SparseVector({4: 2.0}) and parts[2] == SparseVector({1: 3.0})
    with pytest.raises(DomainError):
        lay.locate(15)


def test_parse_eta():
    assert D.parse_eta("geom:2", 4).eta == (2, 4, 8, 16)
    assert D.parse_eta("linear", 3).eta == (1, 2, 3)
    lay = D.parse_eta("list:3,1,5", 99)
    assert lay.eta == (3, 1, 5) and not lay.unbounded and not lay.nondecreasing
    for bad in ("geom:1", "geom:x", "spiral", "list:0,2"):
        with pytest.raises(ConfigError):
            D.parse_eta(bad, 3)


def test_block_norm_examples():
    b = BasisContext.build("const:2", 1.0, 16, exact=True)
    lay = D.BlockLayout((4, 4))
    x1 = SparseVector.unit(1, True)
    assert D.block_norm(lay, b, [x1, x1]) == 4
    assert D.block_norm(lay, b, [SparseVector(exact=True)] * 2) == 0
    one = D.BlockLayout((8,))
    a = SparseVector({1: 2, 3: -1}, True)
    assert D.block_norm(one, b, [a]) == synthesize(b, a).p_norm(b.ctx)
    with pytest.raises(DomainError):
        D.block_norm(lay, b, [x1])
    with pytest.raises(DomainError):
        D.block_norm(lay, b, [SparseVector.unit(5, True), x1])


def test_greedy_reduces_to_single_block(bctx):
    lay = D.BlockLayout((64,))
    a = SparseVector({1: 0.3, 5: -0.9, 17: 0.5, 40: 0.2})
    for m in range(5):
        ds = D.directsum_greedy(lay, bctx, a, m)
        g = greedy_projection(bctx, a, m)
        assert ds.greedy_set == g.greedy_set
        assert np.allclose(ds.norms, g.norms)


def test_greedy_ignores_blocks(bctx):
    lay = D.BlockLayout((4, 4, 4))
    a = SparseVector({1: 0.1, 6: 0.9, 12: -0.5, 3: 0.7})
    assert D.directsum_greedy(lay, bctx, a, 2).greedy_set == (3, 6)
    with pytest.raises(DomainError):
        D.directsum_greedy(lay, bctx, a, -1)


@given(st.integers(0, 10**6), st.sampled_from([1.0, 0.5]))
def test_profile_matches_object_greedy(seed, p):
    b = BasisContext.build("list:3,2,5,2", p, 64)
    lay = D.BlockLayout((3, 9, 20, 30))
    a = D.random_global(lay, trial_rng(seed, 0), 12)
    gidx = np.array(a.support, dtype=np.int64)
    vals = np.array([a[g] for g in gidx])
    f, G, R = D.directsum_profile(lay, b, gidx, vals)
    for m in range(len(a) + 1):
        out = D.directsum_greedy(lay, b, a, m)
        assert f == pytest.approx(out.norms[0], rel=1e-10)
        assert G[m] == pytest.approx(out.norms[1], rel=1e-9, abs=1e-12)
        assert R[m] == pytest.approx(out.norms[2], rel=1e-9, abs=1e-12)


@given(st.integers(0, 10**6), st.sampled_from([1.0, 0.5, 1 / 3]))
def test_sandwich_ratio_range(seed, p):
    b = BasisContext.build("pow:0.5", p, 64)
    lay = D.BlockLayout((2, 4, 8, 16, 32, 64))
    r = D.sandwich_ratio(lay, b, D.random_global(lay, trial_rng(seed, 1)))
    assert 1 - 1e-9 <= r <= 2 + 1e-9


def test_plain_basis_blocks_can_fall_below_coefficient_norm():
    """Using x_k instead of the section vectors x_{k,N} breaks the lower half."""
    b = BasisContext.build("const:2", 1.0, 8, exact=True)
    lay = D.BlockLayout((4,))
    a = SparseVector({1: 1, 2: Fraction(1, 2), 3: Fraction(1, 2), 4: Fraction(1, 4)}, True)
    assert a.power_sum(b.ctx) == Fraction(9, 4)
    assert D.block_power(lay, b, [a]) == 2
    assert D.block_power(lay, b, [a], section=True).lo >= a.power_sum(b.ctx).hi


def test_qg_scan_and_conditionality():
    lay = D.parse_eta("geom:2", 8)
    b = BasisContext.build("const:2", 1.0, 256)
    q = D.directsum_qg_scan(lay, b, 100, 128, seed=4)
    assert q["pass"]
    be = BasisContext.build("const:2", 1.0, 256, exact=True)
    rows = D.directsum_conditionality(lay, be, [1, 2, 4, 16, 64, 256])
    assert rows[0].tag == "trivial"
    assert all(r.passed for r in rows)
    ratios = [r.extra["upper_over_gamma"] for r in rows[1:]]
    assert max(ratios) <= 2 ** 1 * 2 + 1e-9
