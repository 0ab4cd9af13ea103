"""Dual functionals ``x_j*`` as elements of ``l_inf``: signed sums, column sums,
the norming comparison and the prefix-sum quantities of the dual basis.

Every ``x_j*`` is nonnegative and supported on the ``rho``-orbit of ``j``,
so sup-norms of signed sums only need coordinates up to ``max(A)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .basis import BasisContext, head_unit_witness, synth_arrays
from .conditionality import REL_SLACK, BoundReport
from .errors import CapacityExceeded, DomainError
from .greedy import random_coefficients, trial_rng
from .sparse import Scalar, SparseVector


def _orbit_values(bctx: BasisContext, j: int) -> list[tuple[int, Scalar]]:
    """``[(k, x_j*(k))]`` along the orbit ``j, rho(j), ..., 1``."""
    t = bctx.tables
    val = bctx.scalar(1)
    out = [(j, val)]
    while j > 1:
        r = t.rho(j)
        val = val * bctx.w(r)
        out.append((r, val))
        j = r
    return out


@dataclass(frozen=True)
class DualCombination:
    A: tuple[int, ...]
    signs: tuple[int, ...]
    vector: SparseVector
    sup_norm: Scalar

    @property
    def argmax(self) -> int:
        """Smallest coordinate where the sup-norm is attained (0 when empty)."""
        for k, v in self.vector.items():
            if abs(v) == self.sup_norm:
                return k
        return 0


def dual_combination(bctx: BasisContext, A: Iterable[int], signs: Sequence[int] | None = None) -> DualCombination:
    """``sum_{j in A} eps_j x_j*`` (``eps = +1`` by default)."""
    A = tuple(sorted(set(int(a) for a in A)))
    signs = tuple(signs) if signs is not None else (1,) * len(A)
    if len(signs) != len(A):
        raise DomainError("one sign per index is required")
    if any(s not in (1, -1) for s in signs):
        raise DomainError("signs must be +1 or -1")
    if A and A[0] < 1:
        raise DomainError("dual indices start at 1")
    if A and A[-1] > bctx.tables.max_index:
        raise CapacityExceeded(f"index {A[-1]} beyond table horizon")
    acc: dict[int, Scalar] = {}
    for j, s in zip(A, signs):
        for k, v in _orbit_values(bctx, j):
            acc[k] = acc.get(k, 0) + s * v
    vec = SparseVector._wrap({k: v for k, v in acc.items() if v}, bctx.exact)
    sup = max((abs(v) for v in vec._data.values()), default=bctx.scalar(0))
    return DualCombination(A, signs, vec, sup)


def dual_sum_supnorm(bctx: BasisContext, A: Iterable[int], signs: Sequence[int] | None = None) -> Scalar:
    return dual_combination(bctx, A, signs).sup_norm


def sparse_level_sum(bctx: BasisContext, n_max: int) -> Scalar:
    """``||sum_{n <= n_max} x*_{Lambda(n)}||_inf``."""
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    t = bctx.tables
    return dual_sum_supnorm(bctx, [t.lambda_cap(n) for n in range(n_max + 1)])


def column_level_sums(bctx: BasisContext, k: int, r, index_limit: int | None = None) -> list:
    """``[sum_{j in J_{k,n}} |x_j*(k)|^{r p}]`` for ``n = 0, 1, ...`` while the level fits.

    ``|x_j*(k)|^{r p}`` is the product of ``d^{-r}`` along the chain from
    ``j`` up to ``k``; it is a rational number whenever ``r`` is an integer,
    so ``r = 1`` gives exact ``p``-power sums for every ``p``.
    """
    t = bctx.tables
    limit = min(t.max_index, index_limit or t.max_index)
    exact_r = isinstance(r, int) or (isinstance(r, Fraction) and r.denominator == 1)

    def factor(d: int):
        return Fraction(1, d ** int(r)) if exact_r else float(d) ** (-float(r))

    level = [(k, Fraction(1) if exact_r else 1.0)]
    out = [level[0][1]]
    while True:
        lo, hi = t.sigma(level[0][0]), t.sigma(level[-1][0] + 1)
        if hi - 1 > limit:
            break
        nxt = []
        for j, v in level:
            c = v * factor(t.dn(j))
            nxt.extend((i, c) for i in range(t.sigma(j), t.sigma(j + 1)))
        assert nxt[0][0] == lo and nxt[-1][0] == hi - 1
        level = nxt
        out.append(math.fsum(v for _, v in level) if not exact_r else sum(v for _, v in level))
    return out


def column_q_bound(bctx: BasisContext, k: int, q: float, index_limit: int | None = None) -> tuple[float, float]:
    """Truncated ``sum_j |x_j*(k)|^q`` and the geometric bound ``1 / (1 - 2^{(p-q)/p})``."""
    p = bctx.p
    if not q > p:
        raise DomainError("column q-sums need q > p")
    r = Fraction(q).limit_denominator(10**6) / Fraction(p).limit_denominator(10**6)
    if r.denominator != 1:
        r = float(r)
    levels = column_level_sums(bctx, k, r, index_limit)
    total = sum(levels)
    return float(total), 1 / (1 - 2 ** ((p - q) / p))


@dataclass
class PrefixRow:
    m: int
    gamma: int
    first_coordinate: Scalar  # sum_{j <= m} x_j*(1)
    plus_sup: Scalar  # ||sum_{j <= m} x_j*||_inf
    alt_sup_max: Scalar  # max_{m' <= m} ||sum_{j <= m'} (-1)^j x_j*||_inf


def prefix_scan(bctx: BasisContext, m_max: int) -> list[PrefixRow]:
    """Running dual prefix sums for ``m = 1 .. m_max``.

    Adding ``x_m*`` changes only the orbit of ``m``.  The all-plus sum only
    grows, so its sup is a running max.  For the alternating sum the running
    max over changed entries equals ``max_{m' <= m}`` of its sup-norm.
    """
    t = bctx.tables
    if m_max > min(t.max_index, t.gamma_horizon):
        raise CapacityExceeded(f"m={m_max} beyond table horizon")
    plus: dict[int, Scalar] = {}
    alt: dict[int, Scalar] = {}
    plus_sup = alt_sup = bctx.scalar(0)
    rows = []
    for m in range(1, m_max + 1):
        s = -1 if m % 2 else 1
        for k, v in _orbit_values(bctx, m):
            a = plus[k] = plus.get(k, 0) + v
            b = alt[k] = alt.get(k, 0) + s * v
            if a > plus_sup:
                plus_sup = a
            if abs(b) > alt_sup:
                alt_sup = abs(b)
        rows.append(PrefixRow(m, t.gamma(m), plus[1], plus_sup, alt_sup))
    return rows


def prefix_reports(bctx: BasisContext, m_max: int, grid: Sequence[int] | None = None) -> list[BoundReport]:
    """Report rows per ``m``: the first-coordinate sum against ``Gamma(m)``,
    the alternating sup against 2, the chain ``C_m >= ||x||/(4 ||y||) >= Gamma(m)/8``
    and the Lebesgue line ``4 + 3 Gamma(m)``."""
    rows = prefix_scan(bctx, m_max)
    keep = set(grid) if grid is not None else None
    out = []
    for r in rows:
        if keep is not None and r.m not in keep:
            continue
        g = r.gamma
        x, y = float(r.first_coordinate), float(r.alt_sup_max)
        out.append(BoundReport(r.m, "prefix_sum_first_coordinate", x, None, g, "dual-lower-estimate",
                               r.first_coordinate > g, witness="sum_{j<=m} x_j*(1) > Gamma(m)"))
        out.append(BoundReport(r.m, "alternating_sup", None, y, 2.0, "dual-alternating", r.alt_sup_max <= 2,
                               witness="max over m' <= m of ||sum (-1)^j x_j*||_inf"))
        lq = float(r.plus_sup) / (4 * y) if y else math.inf
        out.append(BoundReport(r.m, "quasi_greedy_lower", lq, None, g / 8, "dual-quasi-greedy-chain",
                               lq >= g / 8 * (1 - REL_SLACK),
                               witness="||x-sum||_inf / (4 ||alt-sum||_inf)",
                               extra={"plus_sup": float(r.plus_sup), "alt_sup": y}))
        out.append(BoundReport(r.m, "lebesgue_dual", None, 4.0 + 3 * g, 4.0 + 3 * g, "dual-lebesgue-arithmetic", True,
                               witness="external bound 1 + 3 E_m with E_m <= 1 + Gamma(m)"))
    return out


def phi_upper_scan(bctx: BasisContext, m_values: Sequence[int], trials: int, seed: int,
                   universe: int | None = None) -> list[dict]:
    """Sampled ``||sum_{j in A} eps_j x_j*||_inf`` for ``|A| = m`` against ``1 + Gamma(m)``.

    Also checks coordinatewise that the signed sum is dominated by the
    all-plus sum (dual vectors are nonnegative).
    """
    t = bctx.tables
    universe = universe or min(t.max_index, t.gamma_horizon)
    rows = []
    for m in m_values:
        if m > universe:
            raise CapacityExceeded(f"m={m} exceeds the sampling universe {universe}")
        worst, worst_trial, dominated = 0.0, -1, True
        for trial in range(trials):
            rng = trial_rng(seed, trial * 1_000_003 + m)
            A = np.sort(rng.choice(universe, size=m, replace=False) + 1).tolist()
            eps = rng.choice([-1, 1], size=m).tolist()
            c = dual_combination(bctx, A, eps)
            plus = dual_combination(bctx, A)
            if any(v < 0 for v in plus.vector._data.values()):
                dominated = False
            if any(abs(v) > plus.vector[k] for k, v in c.vector.items()):
                dominated = False
            if float(c.sup_norm) > worst:
                worst, worst_trial = float(c.sup_norm), trial
            worst = max(worst, float(plus.sup_norm))
        bound = 1 + t.gamma(m)
        rows.append({"m": m, "worst": worst, "bound": bound, "trial": worst_trial,
                     "dominated": dominated, "pass": dominated and worst <= bound * (1 + REL_SLACK)})
    return rows


@dataclass(frozen=True)
class NormingResult:
    best: float
    sup_norm: float
    constructive: float
    sampled: float

    def ok(self, p: float, tol: float = 1e-12) -> bool:
        """``2^{-1/p} ||y||_inf <= best <= ||y||_inf`` (up to ``tol``)."""
        return (self.best <= self.sup_norm * (1 + tol) + tol
                and self.best >= 2 ** (-1 / p) * self.sup_norm * (1 - tol) - tol)


def norming_check(bctx: BasisContext, y: SparseVector, trials: int, seed: int,
                  max_support: int = 64) -> NormingResult:
    """Largest ``|<y, x>|`` over sampled ``x`` with ``||x|| = 1``.

    Candidates are random normalized combinations of ``x_1 .. x_N`` and, for
    each ``j`` in the support of ``y``, ``2^{-1/p}`` times the element with
    ``S_N x = e_j`` and ``||x||^p = 2``, where ``N = max supp y``.  The latter
    reach ``2^{-1/p} |y(j)|``; Hoelder caps every candidate at ``||y||_inf``.
    """
    if not y:
        return NormingResult(0.0, 0.0, 0.0, 0.0)
    p = bctx.p
    N = max(y.support)
    yd = {k: float(v) for k, v in y.items()}
    sup = max(abs(v) for v in yd.values())
    scale = 2 ** (-1 / p)
    constructive = 0.0
    for j in y.support:
        x = head_unit_witness(bctx, j, N)
        val = abs(math.fsum(yd.get(k, 0.0) * float(v) for k, v in x.items())) * scale
        constructive = max(constructive, val)
    sampled = 0.0
    for trial in range(trials):
        idx, vals = random_coefficients(trial_rng(seed, trial), min(max_support, N), N)
        coords, xv = synth_arrays(bctx, idx, vals)
        norm = float(np.sum(np.abs(xv) ** p)) ** (1 / p)
        if norm == 0:
            continue
        val = abs(math.fsum(yd.get(int(k), 0.0) * v for k, v in zip(coords, xv))) / norm
        sampled = max(sampled, val)
    return NormingResult(max(constructive, sampled), sup, constructive, sampled)
