"""Thresholding greedy algorithm on the basis and the scans built on it."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .basis import BasisContext, CoefficientVector, block_coordinates, synth_arrays, synthesize
from .errors import DomainError
from .sparse import SparseVector

REL_SLACK = 1e-9


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("LINDY_THREADS", "1")))
    except ValueError:
        return 1


def greedy_order(a: SparseVector) -> list[int]:
    """Support sorted by decreasing magnitude; ties go to the lower index."""
    return [k for k, _ in sorted(a.items(), key=lambda kv: (-abs(kv[1]), kv[0]))]


@dataclass
class GreedyOutcome:
    greedy_set: tuple[int, ...]
    projection: CoefficientVector
    residual: CoefficientVector
    norms: tuple  # power sums of f, G_m f, f - G_m f

    def ratios(self, p: float) -> tuple[float, float]:
        """``(||G_m f|| / ||f||, ||f - G_m f|| / ||f||)``."""
        f, g, r = (float(x) for x in self.norms)
        if f == 0:
            return 0.0, 0.0
        return (g / f) ** (1 / p), (r / f) ** (1 / p)


def greedy_projection(bctx: BasisContext, a: SparseVector, m: int) -> GreedyOutcome:
    if m < 0:
        raise DomainError("m must be nonnegative")
    chosen = greedy_order(a)[:m]
    proj = CoefficientVector._wrap({k: a[k] for k in chosen}, a.exact)
    chosen_set = set(chosen)
    res = CoefficientVector._wrap({k: v for k, v in a.items() if k not in chosen_set}, a.exact)
    ctx = bctx.ctx
    norms = tuple(synthesize(bctx, x).power_sum(ctx) for x in (a, proj, res))
    return GreedyOutcome(tuple(sorted(chosen)), proj, res, norms)


def restricted_truncation(bctx: BasisContext, a: SparseVector, m: int) -> CoefficientVector:
    """``min_{k in A} |a_k| * sum_{k in A} sign(a_k) e_k`` with ``A`` the greedy set."""
    if m < 1 or not a:
        raise DomainError("restricted truncation needs m >= 1 and a nonzero input")
    chosen = greedy_order(a)[:m]
    t = min(abs(a[k]) for k in chosen)
    return CoefficientVector._wrap({k: t if a[k] > 0 else -t for k in chosen}, a.exact)


def coordinate_projection(bctx: BasisContext, a: SparseVector, A: Iterable[int]) -> CoefficientVector:
    return CoefficientVector._wrap(a.restrict(A).as_dict(), a.exact)


def qg_bounds(p: float) -> tuple[float, float]:
    """``(residual bound, projection bound)`` for the greedy operators."""
    two = 2.0 ** (1 / p)
    return two, min(3.0 ** (1 / p), 2.0 ** (2 / p) / (two - 1))


def democracy_bounds(p: float, m: int) -> tuple[float, float]:
    """Stated two-sided bound ``(1 - 2^{-1/p}) m^{1/p} <= ||1_{eps,A}|| <= 2 m^{1/p}``.

    The upper half fails for ``p < 1`` already at ``m = 1`` since
    ``||x_k|| = 2^{1/p}``; see :func:`democracy_upper_ptriangle`.
    """
    return (1 - 2.0 ** (-1 / p)) * m ** (1 / p), 2 * m ** (1 / p)


def democracy_upper_ptriangle(p: float, m: int) -> float:
    """``(2m)^{1/p}``: the p-triangle inequality applied to ``||x_k||^p = 2``."""
    return (2.0 * m) ** (1 / p)


def lebesgue_bounds(p: float, km_c: tuple[float, float], delta_s: float) -> tuple[float, float]:
    """Interval for ``L_m`` from an interval for ``k_m^c`` and a bound on ``Delta_s``."""
    lo, hi = km_c
    if lo > hi:
        raise DomainError(f"invalid bound ordering: {lo} > {hi}")
    if delta_s < 1:
        raise DomainError("Delta_s bound must be >= 1")
    factor = (1 + delta_s**p / (2**p - 1) ** 2) ** (1 / p)
    return lo, factor * hi


# ---------------------------------------------------------------- scans


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def random_coefficients(rng: np.random.Generator, max_support: int, universe: int | None = None):
    """Support size uniform in ``[1, max_support]``, indices from ``[1, universe]``,
    magnitudes log-uniform in ``[1e-3, 1]`` and uniform signs."""
    universe = universe or max_support
    s = int(rng.integers(1, max_support + 1))
    idx = np.sort(rng.choice(universe, size=s, replace=False) + 1)
    mag = 10.0 ** rng.uniform(-3, 0, size=s)
    sign = rng.choice([-1.0, 1.0], size=s)
    return idx.astype(np.int64), mag * sign


def greedy_ranks(idx: np.ndarray, vals: np.ndarray) -> np.ndarray:
    order = np.lexsort((idx, -np.abs(vals)))
    rank = np.empty(idx.size, dtype=np.int64)
    rank[order] = np.arange(idx.size)
    return rank


def abs_pow(x: np.ndarray, p: float) -> np.ndarray:
    """``|x|**p`` with fast paths for ``p = 1`` and ``p = 1/2``."""
    if p == 1:
        return np.abs(x)
    if p == 0.5:
        return np.sqrt(np.abs(x))
    return np.abs(x) ** p


def profile_from_terms(coords, t1, r1, t2, r2, s: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Power sums of ``G_m f`` and ``f - G_m f`` for ``m = 0 .. s``.

    Coordinate ``i`` of ``G_m f`` is ``t1[i] [r1[i] < m] + t2[i] [r2[i] < m]``;
    absent terms carry value 0 and rank ``s``.  Each coordinate switches at
    most twice, so difference arrays over ``m`` give every ``m`` at once.
    """
    lo = np.minimum(r1, r2)
    hi = np.maximum(r1, r2)
    first_is_1 = r1 <= r2
    v_lo = abs_pow(np.where(first_is_1, t1, t2), p)
    v_hi = abs_pow(np.where(first_is_1, t2, t1), p)
    tot = abs_pow(t1 + t2, p)
    n = s + 2
    G = np.bincount(lo + 1, v_lo, n) + np.bincount(hi + 1, tot - v_lo, n)
    R = np.bincount(lo + 1, v_hi - tot, n) - np.bincount(hi + 1, v_hi, n)
    R[0] += tot.sum()
    G = np.cumsum(G)[: s + 1]
    R = np.cumsum(R)[: s + 1]
    return np.maximum(G, 0), np.maximum(R, 0)


def greedy_profile(bctx: BasisContext, idx: np.ndarray, vals: np.ndarray):
    """``(||f||^p, [||G_m f||^p], [||f - G_m f||^p])`` for all ``m`` (float mode)."""
    idx = np.asarray(idx, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    s = idx.size
    rank = greedy_ranks(idx, vals)
    bcoords, owner = block_coordinates(bctx.tables, idx)
    bterms = -(vals * bctx.w_array[idx])[owner]
    # block coordinates are pairwise distinct; only idx can collide with them
    top = int(bcoords.max(initial=0)) + 1 if bcoords.size else int(idx.max()) + 1
    top = max(top, int(idx.max()) + 1)
    slot = np.full(top, -1, dtype=np.int64)
    slot[bcoords] = np.arange(bcoords.size)
    hit = slot[idx]
    fresh = hit < 0
    n = bcoords.size + int(fresh.sum())
    pos_idx = hit.copy()
    pos_idx[fresh] = bcoords.size + np.arange(int(fresh.sum()))
    uc = np.concatenate([bcoords, idx[fresh]])
    inv = np.concatenate([pos_idx, np.arange(bcoords.size)])
    t1 = np.zeros(n)
    t2 = np.zeros(n)
    r1 = np.full(n, s, dtype=np.int64)
    r2 = np.full(n, s, dtype=np.int64)
    t1[inv[:s]] = vals
    r1[inv[:s]] = rank
    t2[inv[s:]] = bterms
    r2[inv[s:]] = rank[owner]
    G, R = profile_from_terms(uc, t1, r1, t2, r2, s, bctx.p)
    return R[0], G, R


@dataclass
class ScanResult:
    quantity: str
    worst: float
    bound: float
    trial: int
    m: int
    passed: bool
    count: int = 0
    extra: dict = field(default_factory=dict)


def _map_trials(fn, trials: int):
    threads = thread_count()
    if threads == 1 or trials < 64:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(threads) as ex:
        return list(ex.map(fn, range(trials), chunksize=32))


def quasi_greedy_scan(bctx: BasisContext, trials: int, max_support: int, seed: int) -> list[ScanResult]:
    """Worst ``||f - G_m f|| / ||f||`` and ``||G_m f|| / ||f||`` over seeded random ``f``."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    p = bctx.p
    universe = min(max_support, bctx.horizon)

    def one(trial):
        idx, vals = random_coefficients(trial_rng(seed, trial), min(max_support, universe), universe)
        f, G, R = greedy_profile(bctx, idx, vals)
        g = G[1:] / f
        r = R[1:] / f
        mg, mr = int(np.argmax(g)), int(np.argmax(r))
        return g[mg], mg + 1, r[mr], mr + 1

    rows = _map_trials(one, trials)
    res_bound, proj_bound = qg_bounds(p)
    out = []
    for name, col, bound in (("residual_ratio", 2, res_bound), ("projection_ratio", 0, proj_bound)):
        best = max(range(trials), key=lambda t: (rows[t][col], -t))
        worst = float(rows[best][col]) ** (1 / p)
        out.append(
            ScanResult(name, worst, bound, best, rows[best][col + 1], worst <= bound * (1 + REL_SLACK), trials)
        )
    return out


def replay_trial(bctx: BasisContext, max_support: int, seed: int, trial: int) -> CoefficientVector:
    """Coefficient vector used by scan trial ``trial`` (for failure reports)."""
    universe = min(max_support, bctx.horizon)
    idx, vals = random_coefficients(trial_rng(seed, trial), universe, universe)
    return CoefficientVector._wrap({int(k): float(v) for k, v in zip(idx, vals)}, False)


def sign_sum_norm(bctx: BasisContext, A: np.ndarray, signs: np.ndarray) -> float:
    _, vals = synth_arrays(bctx, A, signs)
    return float(np.sum(abs_pow(vals, bctx.p))) ** (1 / bctx.p)


def democracy_scan(bctx: BasisContext, m_values: Sequence[int], trials: int, seed: int, universe: int | None = None):
    """Per ``m``: min and max of ``||1_{eps,A}||`` over sampled ``|A| = m`` plus
    the structured sets ``[1, m]`` with constant and alternating signs."""
    p = bctx.p
    universe = min(universe or 4 * max(m_values), bctx.horizon)
    rows = []
    for m in m_values:
        if m > universe:
            raise DomainError(f"m={m} exceeds the sampling universe {universe}")
        lo_b, hi_b = democracy_bounds(p, m)
        samples = []
        first = np.arange(1, m + 1)
        samples.append(sign_sum_norm(bctx, first, np.ones(m)))
        samples.append(sign_sum_norm(bctx, first, (-1.0) ** first))
        for t in range(trials):
            rng = trial_rng(seed, m * 1_000_003 + t)
            A = np.sort(rng.choice(universe, size=m, replace=False) + 1)
            samples.append(sign_sum_norm(bctx, A, rng.choice([-1.0, 1.0], size=m)))
        lo, hi = min(samples), max(samples)
        tri = democracy_upper_ptriangle(p, m)
        lo_ok = lo >= lo_b * (1 - REL_SLACK)
        ok = lo_ok and hi <= hi_b * (1 + REL_SLACK)
        ok_tri = lo_ok and hi <= tri * (1 + REL_SLACK)
        rows.append({"m": m, "min": lo, "max": hi, "lower_bound": lo_b, "upper_bound": hi_b, "pass": ok,
                     "upper_ptriangle": tri, "pass_ptriangle": ok_tri})
    return rows


def truncation_scan(bctx: BasisContext, trials: int, max_support: int, m_max: int, seed: int) -> ScanResult:
    """Worst ``||U_m f|| / ||f||`` over random ``f`` and ``m <= m_max``."""
    p = bctx.p
    universe = min(max_support, bctx.horizon)
    worst, where = 0.0, (0, 0)
    for trial in range(trials):
        idx, vals = random_coefficients(trial_rng(seed, trial), universe, universe)
        f_norm = sign_sum_norm(bctx, idx, vals)
        rank = greedy_ranks(idx, vals)
        order = np.argsort(rank)
        for m in range(1, min(m_max, idx.size) + 1):
            chosen = order[:m]
            t = np.abs(vals[chosen]).min()
            u = sign_sum_norm(bctx, idx[chosen], t * np.sign(vals[chosen]))
            if u / f_norm > worst:
                worst, where = u / f_norm, (trial, m)
    return ScanResult("restricted_truncation", worst, float("inf"), where[0], where[1], np.isfinite(worst), trials)


def succ_ratio(bctx: BasisContext, A: np.ndarray, B: np.ndarray, signs: dict[int, float]) -> float:
    """``||1_{gamma,B}|| / ||1_{gamma,A}||`` for ``B`` inside ``A``."""
    sa = np.array([signs[int(k)] for k in A])
    sb = np.array([signs[int(k)] for k in B])
    return sign_sum_norm(bctx, B, sb) / sign_sum_norm(bctx, A, sa)


def nested_truncation_ratio(bctx: BasisContext, A: np.ndarray, B: np.ndarray, signs: dict[int, float], eps: float = 1e-9) -> float:
    """``||U_{|B|} f|| / ||f||`` for ``f = 1_{gamma,B} + (1 - eps) 1_{gamma, A minus B}``.

    The greedy set of ``f`` is ``B`` and ``U_{|B|} f = 1_{gamma,B}``, so this
    member of the truncation family approaches the nested ratio as eps -> 0.
    """
    Bs = set(int(k) for k in B)
    vals = np.array([signs[int(k)] * (1.0 if int(k) in Bs else 1 - eps) for k in A])
    sb = np.array([signs[int(k)] for k in B])
    return sign_sum_norm(bctx, B, sb) / sign_sum_norm(bctx, A, vals)
