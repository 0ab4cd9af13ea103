"""Certified upper bounds and constructive lower bounds for the
conditionality constants of the basis.

Column p-powers ``|x_j*(k)|**p`` are products of ``1/d`` along the rho-chain
from ``j`` down to ``k``, hence rational for every ``p``; all column sums
below are exact :class:`~fractions.Fraction` values.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .basis import BasisContext, basis_vector
from .errors import CapacityExceeded, DomainError, InvariantViolation
from .sparse import Enclosure, SparseVector

REL_SLACK = 1e-9


@dataclass
class BoundReport:
    m: int
    quantity: str
    lower: float | None
    upper: float | None
    reference: float | None
    tag: str
    passed: bool
    witness: str = ""
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ColumnTop:
    power: Fraction  # sum of p-powers
    column: int
    p: float

    @property
    def norm(self) -> float:
        return float(self.power) ** (1 / self.p)


def restricted_column_sums(bctx: BasisContext, m: int) -> list[Fraction]:
    """``S(k) = sum_{k <= j <= m} |x_j*(k)|^p`` for ``k = 1 .. m``.

    Backward recursion ``S(k) = 1 + (1/d_k) sum_{i in block(k), i <= m} S(i)``.
    """
    t = bctx.tables
    if m > t.max_index:
        raise CapacityExceeded(f"m={m} beyond table horizon")
    S = [Fraction(0)] * (m + 2)
    for k in range(m, 0, -1):
        lo, hi = t.sigma(k), min(t.sigma(k + 1), m + 1)
        acc = Fraction(0)
        for i in range(lo, hi):
            acc += S[i]
        S[k] = 1 + acc / t.dn(k) if acc else Fraction(1)
    return S[1 : m + 1]


def column_top(bctx: BasisContext, k: int, m: int) -> Fraction:
    """Sum of the ``m`` largest ``|x_j*(k)|^p`` over all ``j`` (best-first search).

    The children of ``j`` in column ``k`` are the block of ``j``, all with the
    value ``value(j) / d_j``; a heap of such groups yields entries in
    nonincreasing order.
    """
    t = bctx.tables
    heap: list[tuple[Fraction, int, int]] = [(Fraction(-1), k, k + 1)]
    total = Fraction(0)
    left = m
    while left and heap:
        negv, lo, hi = heapq.heappop(heap)
        take = min(left, hi - lo)
        total += -negv * take
        left -= take
        for j in range(lo, lo + take):
            if t.sigma(j + 1) - 1 > t.max_index:
                raise CapacityExceeded(f"column {k} search left the tables at j={j}")
            heapq.heappush(heap, (negv / t.dn(j), t.sigma(j), t.sigma(j + 1)))
    return total


def t_norm_top(bctx: BasisContext, m: int, k_max: int | None = None) -> ColumnTop:
    """``max_k (sum of the m largest |x_j*(k)|^p)`` as an exact power sum.

    With ``k_max=None`` the rows are restricted to ``j <= m`` (equivalently
    ``A`` inside ``[1, m]``), which is all that matters for vectors in the
    span of ``x_1 .. x_m``; columns ``k > m`` then vanish.  With an explicit
    ``k_max`` every row is allowed and columns ``1 .. k_max`` are scanned.
    """
    if m < 1:
        raise DomainError("m must be positive")
    if k_max is None:
        S = restricted_column_sums(bctx, m)
        best = max(range(m), key=lambda i: (S[i], -i))
        return ColumnTop(S[best], best + 1, bctx.p)
    best_k, best = 1, Fraction(-1)
    for k in range(1, k_max + 1):
        val = column_top(bctx, k, m)
        if val > best:
            best_k, best = k, val
    return ColumnTop(best, best_k, bctx.p)


def km_upper(bctx: BasisContext, m: int, k_max: int | None = None) -> tuple[float, str]:
    """``min(2^{1/p} T, 2^{1/p} (1 + Gamma(m))^{1/p})`` and which term won."""
    return _upper_from_top(bctx, m, t_norm_top(bctx, m, k_max))


@dataclass
class UVWitness:
    m: int
    u: SparseVector | None
    v: SparseVector | None
    u_power: object  # Enclosure (exact mode) or float
    v_power: object
    lower_estimate: float
    gamma: int
    steps_checked: int = 0

    @property
    def v_exceeds(self) -> bool:
        """``||v_m||^p > 1 + Gamma(m)``, certified in exact mode."""
        ref = 1 + self.gamma
        if isinstance(self.v_power, Enclosure):
            return self.v_power.lo > ref
        return self.v_power > ref


def _pw(bctx, x):
    return bctx.ctx.pow_abs(x)


def _checkpoints(ms: Sequence[int]) -> set[int]:
    """Powers of two and the last target: where incremental sums are recomputed directly."""
    return {m for m in ms if m & (m - 1) == 0} | {ms[-1]}


def uv_witnesses(bctx: BasisContext, ms: Sequence[int], keep_vectors: bool = False, check_steps: bool = True,
                 checkpoints: Iterable[int] | None = None):
    """Run ``u_{k+1} = u_k - u_k(k+1) x_{k+1}`` and
    ``v_{k+1} = v_k - sign(v_k(k+1)) u_k(k+1) x_{k+1}`` from ``u_1 = v_1 = x_1``,
    yielding a :class:`UVWitness` at every ``m`` in ``ms`` (increasing).

    The block of ``x_{k+1}`` lies beyond the supports of ``u_k`` and ``v_k``,
    so each step changes the power sums by a closed-form increment; the
    sums are carried along and recomputed from the vectors at the
    checkpoints (powers of two and the last target by default).

    In exact mode each step asserts ``u_k(k+1) = -x*_{k+1}(1)`` and the
    increment identity ``||v_{k+1}||^p - ||v_k||^p =
    (|v_k(k+1)| + |u_k(k+1)|)^p + |u_k(k+1)|^p - |v_k(k+1)|^p``.
    """
    ms = sorted(set(int(m) for m in ms))
    if not ms:
        return
    if ms[0] < 1:
        raise DomainError("m must be positive")
    bctx._check_basis(ms[-1])
    checks = _checkpoints(ms) if checkpoints is None else set(checkpoints)
    exact = bctx.exact
    ctx = bctx.ctx
    x1 = basis_vector(bctx, 1)
    u = x1.as_dict()
    v = x1.as_dict()
    u_run = x1.power_sum(ctx)
    v_run = u_run
    # x*_{k}(1) along the way, for the sign-structure check
    col1 = {1: bctx.scalar(1)}
    t = bctx.tables
    targets = iter(ms)
    target = next(targets)
    k = 1
    checked = 0
    while True:
        if k == target:
            u_vec = v_vec = None
            if keep_vectors or k in checks:
                u_vec = SparseVector._wrap(dict(u), exact)
                v_vec = SparseVector._wrap(dict(v), exact)
            up, vp = u_run, v_run
            if k in checks:
                up, vp = u_vec.power_sum(ctx), v_vec.power_sum(ctx)
                if not (_agree(up, u_run) and _agree(vp, v_run)):
                    raise InvariantViolation(f"incremental power sums disagree at m={k}", witness={"m": k})
            est = 2 ** (-1 / bctx.p) * (float(vp) / float(up)) ** (1 / bctx.p)
            yield UVWitness(k, u_vec if keep_vectors else None, v_vec if keep_vectors else None,
                            up, vp, est, t.gamma(k), checked)
            target = next(targets, None)
            if target is None:
                return
        # step k -> k+1
        nk = k + 1
        uk = u.pop(nk, 0)
        vk = v.get(nk, 0)
        col1[nk] = col1[t.rho(nk)] * bctx.w(t.rho(nk))
        if exact and uk != -col1[nk]:
            raise InvariantViolation(f"u_{k}({nk}) = {uk} != -x*_{nk}(1)", witness={"k": k})
        sgn = 1 if vk >= 0 else -1
        c = sgn * uk
        newv = vk - c
        if newv:
            v[nk] = newv
        else:
            v.pop(nk, None)
        w = bctx.w(nk)
        d = t.dn(nk)
        uw, vw = uk * w, c * w
        for i in range(t.sigma(nk), t.sigma(nk + 1)):
            if uw:
                u[i] = uw
            if vw:
                v[i] = vw
        du = _scaled(_pw(bctx, uw), d) - _pw(bctx, uk)
        dv = _pw(bctx, newv) - _pw(bctx, vk) + _scaled(_pw(bctx, vw), d)
        u_run = u_run + du
        v_run = v_run + dv
        if exact and check_steps:
            rhs = _pw(bctx, abs(vk) + abs(uk)) + _pw(bctx, uk) - _pw(bctx, vk)
            if not dv.overlaps(rhs):
                raise InvariantViolation(f"v increment identity fails at k={k}", witness={"k": k})
            checked += 1
        k = nk


def _scaled(x, d: int):
    return x.scale(d) if isinstance(x, Enclosure) else x * d


def _agree(a, b) -> bool:
    if isinstance(a, Enclosure):
        return a.overlaps(b)
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


def column_top_scan(bctx: BasisContext, ms: Sequence[int], checkpoints: Iterable[int] | None = None):
    """Yield ``(m, ColumnTop)`` equal to ``t_norm_top(bctx, m)`` for each ``m`` in ``ms``.

    ``S_m(k) = sum_{k <= j <= m} |x_j*(k)|^p`` grows only along the orbit of
    ``m`` when row ``m`` is added, so the maximum is a running one.  At the
    checkpoints the backward recursion recomputes it independently.
    """
    ms = sorted(set(int(m) for m in ms))
    if not ms:
        return
    if ms[0] < 1:
        raise DomainError("m must be positive")
    t = bctx.tables
    if ms[-1] > t.max_index:
        raise CapacityExceeded(f"m={ms[-1]} beyond table horizon")
    checks = _checkpoints(ms) if checkpoints is None else set(checkpoints)
    S: dict[int, Fraction] = {}
    best, best_k = Fraction(0), 0
    targets = iter(ms)
    target = next(targets)
    for m in range(1, ms[-1] + 1):
        val, j = Fraction(1), m
        while True:
            s = S[j] = S.get(j, 0) + val
            if s > best or (s == best and j < best_k):
                best, best_k = s, j
            if j == 1:
                break
            r = t.rho(j)
            val = val / t.dn(r)
            j = r
        if m == target:
            top = ColumnTop(best, best_k, bctx.p)
            if m in checks:
                ref = t_norm_top(bctx, m)
                if ref.power != top.power:
                    raise InvariantViolation(f"running column maximum disagrees at m={m}",
                                             witness={"m": m, "running": str(top.power), "direct": str(ref.power)})
            yield m, top
            target = next(targets, None)


def uv_witness(bctx: BasisContext, m: int, keep_vectors: bool = True) -> UVWitness:
    return next(uv_witnesses(bctx, [m], keep_vectors=keep_vectors))


def km_complement_bounds(p: float, k_lower: float, k_upper: float) -> tuple[float, float]:
    """Interval for ``k_m^c`` from one for ``k_m``, via
    ``||Id - S_A||^p <= 1 + ||S_A||^p`` and ``||S_A||^p <= 1 + ||Id - S_A||^p``."""
    upper = (1 + k_upper**p) ** (1 / p)
    lower = max(1.0, max(k_lower**p - 1, 0.0) ** (1 / p))
    return lower, upper


def delta_s_bound(p: float) -> float:
    """Super-democracy ratio bound ``2 m^{1/p} / ((1 - 2^{-1/p}) m^{1/p})``."""
    return 2 / (1 - 2 ** (-1 / p))


def _upper_from_top(bctx: BasisContext, m: int, top: ColumnTop) -> tuple[float, str]:
    p = bctx.p
    via_t = (2 * float(top.power)) ** (1 / p)
    via_gamma = (2 * (1 + bctx.tables.gamma(m))) ** (1 / p)
    return (via_t, "t-norm") if via_t <= via_gamma else (via_gamma, "gamma")


def sandwich_reports(bctx: BasisContext, ms: Sequence[int]) -> list[BoundReport]:
    """Lower witness and certified upper bound per ``m`` against ``(1 + Gamma(m))^{1/p}``."""
    p = bctx.p
    out = []
    tops = column_top_scan(bctx, ms)
    for w, (m, top) in zip(uv_witnesses(bctx, ms), tops):
        g = w.gamma
        ref = (1 + g) ** (1 / p)
        up, which = _upper_from_top(bctx, m, top)
        lower_ok = w.lower_estimate >= 2 ** (-2 / p) * ref * (1 - REL_SLACK) and w.v_exceeds
        upper_ok = up <= 2 ** (1 / p) * ref * (1 + REL_SLACK)
        consistent = w.lower_estimate <= up * (1 + REL_SLACK)
        out.append(BoundReport(m, "k_m", w.lower_estimate, up, ref, "uv-lower/t-norm-upper",
                               lower_ok and upper_ok and consistent,
                               witness=f"u/v recursion to m={m}; upper via {which}",
                               extra={"gamma": g, "v_power": _as_float_pair(w.v_power)}))
    return out


def _as_float_pair(x):
    if isinstance(x, Enclosure):
        return [float(x.lo), float(x.hi)]
    return [float(x), float(x)]


@dataclass
class EnvelopeReport:
    rows: list[dict]
    max_lower_ratio: float
    max_upper_ratio: float
    gamma_ratio_range: tuple[float, float] | None


def envelope_check(bctx: BasisContext, m_grid: Sequence[int], nondecreasing: bool | None = None) -> EnvelopeReport:
    """Ratios of the witnessed lower and certified upper bounds to ``log(m)^{1/p}``
    and, for nondecreasing delta, to ``Gamma(m)^{1/p}``."""
    p = bctx.p
    if nondecreasing is None:
        nondecreasing = bctx.tables.delta.nondecreasing
    rows = []
    if min(m_grid) < 2:
        raise DomainError("envelope grid starts at m = 2")
    for w, (m, top) in zip(uv_witnesses(bctx, m_grid, check_steps=False), column_top_scan(bctx, m_grid)):
        lg = math.log(m) ** (1 / p)
        up, _ = _upper_from_top(bctx, m, top)
        row = {"m": m, "lower": w.lower_estimate, "upper": up, "gamma": w.gamma,
               "lower_over_log": w.lower_estimate / lg, "upper_over_log": up / lg}
        if nondecreasing:
            gp = w.gamma ** (1 / p)
            row["lower_over_gamma"] = w.lower_estimate / gp
            row["upper_over_gamma"] = up / gp
        rows.append(row)
    gr = None
    if nondecreasing and rows:
        gr = (min(r["lower_over_gamma"] for r in rows), max(r["upper_over_gamma"] for r in rows))
    return EnvelopeReport(rows, max(r["lower_over_log"] for r in rows),
                          max(r["upper_over_log"] for r in rows), gr)


def growth_exponent(ms: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope of ``log(value)`` against ``log(log m)``."""
    xs = [math.log(math.log(m)) for m in ms]
    ys = [math.log(v) for v in values]
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx
