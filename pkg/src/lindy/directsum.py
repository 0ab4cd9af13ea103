"""Direct sums ``(X^{(N_1)} + X^{(N_2)} + ...)_p`` of finite sections of the basis.

Block ``b`` holds the first ``N_b`` basis vectors.  A global coefficient index
``g`` maps to ``(b, k)`` with ``k`` in ``[1, N_b]``; the quasinorm is the
``l_p`` sum of the block quasinorms.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import BasisContext, CoefficientVector, block_coordinates, section_embed, synthesize
from .conditionality import BoundReport, restricted_column_sums, uv_witness
from .errors import ConfigError, DomainError
from .greedy import (
    REL_SLACK,
    GreedyOutcome,
    greedy_order,
    greedy_ranks,
    profile_from_terms,
    qg_bounds,
    random_coefficients,
    trial_rng,
)
from .sparse import SparseVector


@dataclass(frozen=True)
class BlockLayout:
    eta: tuple[int, ...]
    unbounded: bool = True

    def __post_init__(self):
        if not self.eta or min(self.eta) < 1:
            raise ConfigError("block sizes must be positive")

    @property
    def offsets(self) -> tuple[int, ...]:
        """``offsets[b]`` = number of global indices before block ``b``."""
        out = [0]
        for n in self.eta:
            out.append(out[-1] + n)
        return tuple(out)

    @property
    def size(self) -> int:
        return sum(self.eta)

    @property
    def nondecreasing(self) -> bool:
        return all(a <= b for a, b in zip(self.eta, self.eta[1:]))

    def locate(self, g: int) -> tuple[int, int]:
        """Global index (1-based) -> ``(block, local index)``; blocks are 0-based."""
        if not 1 <= g <= self.size:
            raise DomainError(f"global index {g} outside [1, {self.size}]")
        off = self.offsets
        b = bisect.bisect_left(off, g) - 1
        return b, g - off[b]

    def glob(self, b: int, k: int) -> int:
        if not 1 <= k <= self.eta[b]:
            raise DomainError(f"local index {k} outside block {b} of size {self.eta[b]}")
        return self.offsets[b] + k

    def split(self, a: SparseVector) -> list[CoefficientVector]:
        parts: list[dict] = [{} for _ in self.eta]
        for g, v in a.items():
            b, k = self.locate(g)
            parts[b][k] = v
        return [CoefficientVector._wrap(p, a.exact) for p in parts]


def parse_eta(text: str, blocks: int) -> BlockLayout:
    """``geom:<r>`` (``N_k = ceil(r^k)``), ``linear`` (``N_k = k``) or ``list:<n1,n2,...>``."""
    kind, _, arg = text.strip().partition(":")
    try:
        if kind == "geom":
            r = float(arg)
            if r <= 1:
                raise ConfigError("geom ratio must exceed 1")
            return BlockLayout(tuple(math.ceil(r**k - 1e-9) for k in range(1, blocks + 1)))
        if kind == "linear":
            return BlockLayout(tuple(range(1, blocks + 1)))
        if kind == "list":
            return BlockLayout(tuple(int(x) for x in arg.split(",") if x.strip()), unbounded=False)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed eta {text!r}") from exc
    raise ConfigError(f"unknown eta rule {text!r}")


def _check_blocks(layout: BlockLayout, blocks: Sequence[SparseVector]) -> None:
    if len(blocks) != len(layout.eta):
        raise DomainError("one coefficient vector per block is required")
    for b, blk in enumerate(blocks):
        if blk and max(blk.support) > layout.eta[b]:
            raise DomainError(f"block {b} coefficients leave [1, {layout.eta[b]}]")


def block_power(layout: BlockLayout, bctx: BasisContext, blocks: Sequence[SparseVector], section: bool = False):
    """``sum_b ||block_b||^p``.

    With ``section=True`` block coefficients refer to the orthogonalized
    section vectors ``x_{k,N_b}`` instead of ``x_k``.
    """
    _check_blocks(layout, blocks)
    total = 0
    for n, blk in zip(layout.eta, blocks):
        if not blk:
            continue
        y = section_embed(bctx, blk, n) if section else synthesize(bctx, blk)
        total = total + y.power_sum(bctx.ctx)
    return total


def block_norm(layout: BlockLayout, bctx: BasisContext, blocks: Sequence[SparseVector], section: bool = False) -> float:
    return bctx.ctx.root(block_power(layout, bctx, blocks, section))


def directsum_greedy(layout: BlockLayout, bctx: BasisContext, coeffs: SparseVector, m: int) -> GreedyOutcome:
    """Greedy projection on global indices (ties to the lowest global index)."""
    if m < 0:
        raise DomainError("m must be nonnegative")
    chosen = greedy_order(coeffs)[:m]
    proj = CoefficientVector._wrap({g: coeffs[g] for g in chosen}, coeffs.exact)
    cs = set(chosen)
    res = CoefficientVector._wrap({g: v for g, v in coeffs.items() if g not in cs}, coeffs.exact)
    norms = tuple(block_power(layout, bctx, layout.split(x)) for x in (coeffs, proj, res))
    return GreedyOutcome(tuple(sorted(chosen)), proj, res, norms)


def directsum_profile(layout: BlockLayout, bctx: BasisContext, gidx: np.ndarray, vals: np.ndarray):
    """Float power sums of ``f``, ``G_m f`` and ``f - G_m f`` for all ``m``."""
    s = gidx.size
    rank = greedy_ranks(gidx, vals)
    off = np.asarray(layout.offsets)
    blk = np.searchsorted(off, gidx, side="left") - 1
    local = gidx - off[blk]
    # sequence coordinates of different blocks are kept apart by a stride
    stride = int(bctx.tables.sigma(max(layout.eta) + 1)) + 1
    bcoords, owner = block_coordinates(bctx.tables, local)
    keys1 = blk * stride + local
    keys2 = blk[owner] * stride + bcoords
    allk = np.concatenate([keys1, keys2])
    uk, inv = np.unique(allk, return_inverse=True)
    n = uk.size
    t1 = np.zeros(n)
    t2 = np.zeros(n)
    r1 = np.full(n, s, dtype=np.int64)
    r2 = np.full(n, s, dtype=np.int64)
    t1[inv[:s]] = vals
    r1[inv[:s]] = rank
    t2[inv[s:]] = -(vals * bctx.w_array[local])[owner]
    r2[inv[s:]] = rank[owner]
    G, R = profile_from_terms(uk, t1, r1, t2, r2, s, bctx.p)
    return R[0], G, R


def directsum_qg_scan(layout: BlockLayout, bctx: BasisContext, trials: int, max_support: int, seed: int):
    """Worst residual and projection ratios of the greedy algorithm on random global vectors."""
    p = bctx.p
    universe = layout.size
    worst_r, worst_g = 0.0, 0.0
    for trial in range(trials):
        gidx, vals = random_coefficients(trial_rng(seed, trial), min(max_support, universe), universe)
        f, G, R = directsum_profile(layout, bctx, gidx, vals)
        worst_g = max(worst_g, float((G[1:] / f).max()))
        worst_r = max(worst_r, float((R[1:] / f).max()))
    res_b, proj_b = qg_bounds(p)
    wr, wg = worst_r ** (1 / p), worst_g ** (1 / p)
    return {"residual_ratio": wr, "residual_bound": res_b, "projection_ratio": wg,
            "projection_bound": proj_b, "pass": wr <= res_b * (1 + REL_SLACK) and wg <= proj_b * (1 + REL_SLACK)}


def random_global(layout: BlockLayout, rng: np.random.Generator, max_support: int | None = None) -> SparseVector:
    universe = layout.size
    gidx, vals = random_coefficients(rng, min(max_support or universe, universe), universe)
    return SparseVector(dict(zip(gidx.tolist(), vals.tolist())))


def sandwich_ratio(layout: BlockLayout, bctx: BasisContext, a: SparseVector) -> float:
    """``(section block norm / ||a||_p)^p``; lies in ``[1, 2]``."""
    y = block_power(layout, bctx, layout.split(a), section=True)
    return float(y) / float(a.power_sum(bctx.ctx))


def directsum_conditionality(layout: BlockLayout, bctx: BasisContext, m_grid: Sequence[int]) -> list[BoundReport]:
    """Per ``m``: a u/v lower witness placed in the largest block, and an upper
    bound valid in every block, both compared with ``Gamma(m)^{1/p}``.

    A coordinate projection splits into block projections of size at most
    ``m``; each is bounded by ``(2(1 + Gamma(m)))^{1/p}`` and by the column
    bound ``(2 T)^{1/p}`` of the largest section.
    """
    p = bctx.p
    big = max(layout.eta)
    sums = restricted_column_sums(bctx, big)
    t_all = max(sums)
    out = []
    for m in m_grid:
        g = bctx.tables.gamma(m)
        ref = g ** (1 / p) if g else 1.0
        if m == 1:
            out.append(BoundReport(1, "k_m[direct sum]", 1.0, 2 ** (1 / p), ref, "trivial", True))
            continue
        mm = min(m, big)
        w = uv_witness(bctx, mm, keep_vectors=False)
        upper = min((2 * (1 + g)) ** (1 / p), (2 * float(t_all)) ** (1 / p))
        out.append(BoundReport(m, "k_m[direct sum]", w.lower_estimate, upper, ref, "block-uv-lower/block-column-upper",
                               w.lower_estimate <= upper * (1 + REL_SLACK),
                               witness=f"u/v witness of size {mm} in a block of size {big}",
                               extra={"lower_over_gamma": w.lower_estimate / ref, "upper_over_gamma": upper / ref}))
    return out
