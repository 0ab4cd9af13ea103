from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lindy import dual as Dl
from lindy.basis import BasisContext, dual_vector
from lindy.errors import CapacityExceeded, DomainError
from lindy.sparse import SparseVector


@pytest.fixture(scope="module")
def classical():
    return BasisContext.build("const:2", 1.0, 4096, exact=True)


def test_dual_sum_examples(classical):
    c = Dl.dual_combination(classical, [1, 2, 3])
    assert c.vector == SparseVector({1: 2, 2: 1, 3: 1}, True)
    assert c.sup_norm == 2 and c.argmax == 1
    assert c.sup_norm > classical.tables.gamma(3)
    assert Dl.dual_sum_supnorm(classical, [1, 2, 3], [-1, 1, -1]) == 1
    assert Dl.dual_sum_supnorm(classical, []) == 0
    with pytest.raises(DomainError):
        Dl.dual_combination(classical, [1, 2], [1])
    with pytest.raises(DomainError):
        Dl.dual_combination(classical, [1], [2])


@given(st.lists(st.integers(1, 300), min_size=1, max_size=20, unique=True), st.data())
def test_combination_matches_dual_vectors(A, data):
    b = BasisContext.build("list:3,2,5,2", 0.5, 400, exact=True)
    eps = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=len(A), max_size=len(A)))
    direct = SparseVector(exact=True)
    for j, e in sorted(zip(A, eps)):
        direct = direct + dual_vector(b, j).scale(e)
    order = sorted(range(len(A)), key=lambda i: A[i])
    c = Dl.dual_combination(b, [A[i] for i in order], [eps[i] for i in order])
    assert c.vector == direct
    assert c.sup_norm == direct.sup_norm()


@pytest.mark.parametrize("delta", ["const:2", "list:3,2,5,2", "pow:0.5"])
def test_sparse_level_sum_at_most_two(delta):
    b = BasisContext.build(delta, 1.0, 2000, exact=True)
    assert Dl.sparse_level_sum(b, 0) == 1
    for n in range(b.tables.max_level + 1):
        assert Dl.sparse_level_sum(b, n) <= 2


@given(st.sampled_from(["const:2", "const:3", "list:3,2,5,2", "pow:0.5"]), st.integers(1, 30),
       st.sampled_from([1.0, 0.5, 0.7]))
def test_column_levels_sum_to_one(delta, k, p):
    b = BasisContext.build(delta, p, 600)
    for s in Dl.column_level_sums(b, k, 1):
        assert s == 1


def test_column_q_bound_example():
    b = BasisContext.build("const:2", 0.5, 4096)
    s, bound = Dl.column_q_bound(b, 1, 1.0)
    assert bound == pytest.approx(2.0)
    # level n contributes 2^n * 4^{-n}
    levels = Dl.column_level_sums(b, 1, 2)
    assert all(v == Fraction(1, 2**n) for n, v in enumerate(levels))
    assert s <= bound
    with pytest.raises(DomainError):
        Dl.column_q_bound(b, 1, 0.4)


def test_prefix_scan_against_direct(classical):
    rows = Dl.prefix_scan(classical, 64)
    for r in rows[::7]:
        A = list(range(1, r.m + 1))
        plus = Dl.dual_combination(classical, A)
        assert r.first_coordinate == plus.vector[1]
        assert r.plus_sup == plus.sup_norm
        alt = max(Dl.dual_sum_supnorm(classical, A[:mm], [(-1) ** j for j in A[:mm]]) for mm in range(1, r.m + 1))
        assert r.alt_sup_max == alt


def test_prefix_reports_classical(classical):
    reports = Dl.prefix_reports(classical, 1024, [2, 64, 1024])
    assert {r.quantity for r in reports} == {"prefix_sum_first_coordinate", "alternating_sup",
                                            "quasi_greedy_lower", "lebesgue_dual"}
    assert all(r.passed for r in reports)
    with pytest.raises(CapacityExceeded):
        Dl.prefix_scan(classical, 10**7)


def test_phi_upper_scan(classical):
    rows = Dl.phi_upper_scan(classical, [1, 4, 32], 10, seed=5, universe=512)
    assert all(r["pass"] and r["dominated"] for r in rows)


@pytest.mark.parametrize("p", [1.0, 0.5])
def test_norming_examples(p):
    b = BasisContext.build("const:2", p, 128)
    res = Dl.norming_check(b, SparseVector.unit(3), 10, seed=1)
    assert res.constructive == pytest.approx(2 ** (-1 / p))
    assert res.ok(p)
    assert Dl.norming_check(b, SparseVector(), 5, 1) == Dl.NormingResult(0.0, 0.0, 0.0, 0.0)


@given(st.dictionaries(st.integers(1, 60), st.floats(-2, 2, allow_nan=False).filter(lambda x: abs(x) > 1e-3),
                       min_size=1, max_size=8))
def test_norming_random(y):
    b = BasisContext.build("list:3,2,5", 0.5, 128)
    assert Dl.norming_check(b, SparseVector(y), 20, seed=2).ok(0.5)
