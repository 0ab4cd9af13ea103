"""Property battery behind ``lindy verify``.

Each check returns report rows; the first violated one raises
:class:`InvariantViolation` carrying the witnessing input.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

import numpy as np

from . import basis as B
from .conditionality import delta_s_bound, km_complement_bounds, sandwich_reports
from .directsum import BlockLayout, random_global, sandwich_ratio
from .dual import column_level_sums, prefix_reports
from .errors import InvariantViolation
from .greedy import (
    REL_SLACK,
    democracy_scan,
    greedy_projection,
    lebesgue_bounds,
    quasi_greedy_scan,
    random_coefficients,
    replay_trial,
    trial_rng,
)
from .indexing import DeltaSpec
from .quotient import IntervalTree, level_partition_ok, q_map, step_power_sum
from .report import bound_row, scan_row
from .sparse import SparseVector


class Battery:
    def __init__(self, delta: DeltaSpec, p: float, seed: int, trials: int = 300, size: int = 256):
        self.delta, self.p, self.seed, self.trials, self.size = delta, p, seed, trials, size
        exact_ok = abs(1 / p - round(1 / p)) < 1e-12
        self.exact = exact_ok
        self.bctx = B.BasisContext.build(delta, p, 4 * size, exact=exact_ok)
        self.fctx = B.BasisContext.build(delta, p, 4 * size, exact=False)
        self.rows: list[dict] = []

    def fail(self, message: str, witness) -> None:
        raise InvariantViolation(message, witness)

    def run(self) -> list[dict]:
        checks: list[Callable[[], None]] = [
            self.indexing, self.biorthogonality, self.norms, self.round_trip, self.greedy,
            self.democracy, self.sandwich, self.columns, self.quotient, self.embedding,
            self.direct_sum, self.dual,
        ]
        for check in checks:
            check()
        return self.rows

    # -- individual checks

    def indexing(self):
        t = self.bctx.tables
        n = min(t.max_index, 1 << 14)
        for k in range(1, t.basis_horizon + 1):
            if t.rho(t.sigma(k)) != k:
                self.fail("rho(sigma(k)) != k", {"k": k})
        for level in range(t.max_level + 1):
            lam = t.lambda_cap(level)
            if lam <= t.gamma_horizon and t.gamma(lam) != level:
                self.fail("Gamma(Lambda(n)) != n", {"n": level})
        for m in range(1, min(n, t.gamma_horizon) // 2 + 1):
            g1, g2 = t.gamma(m), t.gamma(2 * m)
            if not (g2 <= g1 + 1 and (g1 == 0 or g1 + 1 <= 2 * g1)):
                self.fail("doubling property of Gamma fails", {"m": m})
        self.rows.append(scan_row("index_maps", n, None, None, None, "left-inverse", True))

    def biorthogonality(self):
        N = self.size
        bad = B.biorthogonality_defects(self.bctx, N)
        if bad and self.exact:
            self.fail("biorthogonality fails", {"pairs": [(j, k, str(v)) for j, k, v in bad[:5]]})
        if not self.exact:
            worst = max((abs(float(v) - (j == k)) for j, k, v in bad), default=0.0)
            if worst > 1e-9:
                self.fail("biorthogonality fails", {"worst": worst})
        self.rows.append(scan_row("biorthogonality", N, 0, 0, 0, "biorthogonal", True, defects=len(bad)))

    def norms(self):
        ctx = self.bctx.ctx
        for k in range(1, self.size + 1):
            s = B.basis_vector(self.bctx, k).power_sum(ctx)
            if (s != 2) if self.exact else abs(s - 2) > 1e-9:
                self.fail("||x_k||^p != 2", {"k": k})
            if B.dual_vector(self.bctx, k).sup_norm() != 1:
                self.fail("||x_k*||_inf != 1", {"k": k})
        self.rows.append(scan_row("basis_norm_power", self.size, 2, 2, 2, "normalized", True))

    def round_trip(self):
        for trial in range(50):
            idx, vals = random_coefficients(trial_rng(self.seed, trial), 64, self.size)
            a = SparseVector({int(k): Fraction(float(v)) if self.exact else float(v) for k, v in zip(idx, vals)},
                             exact=self.exact)
            back = B.analyze(self.bctx, B.synthesize(self.bctx, a), self.size)
            if self.exact and back != a:
                self.fail("analyze(synthesize(a)) != a", {"trial": trial})
            if not self.exact and max(abs(back[k] - a[k]) for k in range(1, self.size + 1)) > 1e-9:
                self.fail("analyze(synthesize(a)) != a", {"trial": trial})
        self.rows.append(scan_row("synthesis_round_trip", self.size, None, None, None, "biorthogonal", True))

    def greedy(self):
        res = quasi_greedy_scan(self.fctx, self.trials, min(self.size, 512), self.seed)
        for r in res:
            if not r.passed:
                self.fail(f"{r.quantity} {r.worst} exceeds {r.bound}",
                          {"trial": r.trial, "m": r.m,
                           "coefficients": replay_trial(self.fctx, min(self.size, 512), self.seed, r.trial).as_dict()})
            self.rows.append(scan_row(r.quantity, r.m, None, r.worst, r.bound, "quasi-greedy", True, trial=r.trial))
        a = replay_trial(self.fctx, 64, self.seed, 0)
        for m in range(len(a) + 1):
            out = greedy_projection(self.fctx, a, m)
            if out.projection + out.residual != a:
                self.fail("projection + residual != input", {"m": m})

    def democracy(self):
        ms = [m for m in (1, 2, 4, 8, 16, 32, 64) if 4 * m <= self.fctx.horizon]
        for row in democracy_scan(self.fctx, ms, 20, self.seed):
            if not row["pass_ptriangle"]:
                self.fail("democracy bounds fail", row)
            self.rows.append(scan_row("democracy", row["m"], row["min"], row["max"],
                                      [row["lower_bound"], row["upper_ptriangle"]], "democracy", True,
                                      within_stated_upper=row["pass"]))

    def sandwich(self):
        if not self.delta.nondecreasing:
            return
        rows = sandwich_reports(self.bctx, list(range(2, self.size + 1)))
        for r in rows:
            if not r.passed:
                self.fail("conditionality sandwich fails", bound_row(r))
        for r in rows:
            if r.m & (r.m - 1) == 0:
                self.rows.append(bound_row(r))
                lo_c, hi_c = km_complement_bounds(self.p, r.lower, r.upper)
                lo_l, hi_l = lebesgue_bounds(self.p, (lo_c, hi_c), delta_s_bound(self.p))
                self.rows.append(scan_row("lebesgue", r.m, lo_l, hi_l, None, "lebesgue-arithmetic", lo_l <= hi_l))

    def columns(self):
        t = self.bctx.tables
        for k in range(1, 33):
            for n, s in enumerate(column_level_sums(self.bctx, k, 1)):
                if s != 1:
                    self.fail("column level p-power sum != 1", {"k": k, "n": n, "sum": str(s)})
        self.rows.append(scan_row("column_level_sum", 32, 1, 1, 1, "column-block-sum", True, levels=t.max_level))

    def quotient(self):
        t, ctx = self.bctx.tables, self.bctx.ctx
        tree = IntervalTree(t)
        if self.exact:
            for k in range(1, min(self.size, 128) + 1):
                f = q_map(t, ctx, B.basis_vector(self.bctx, k), tree)
                if not f.is_zero:
                    self.fail("Q_p(x_k) != 0", {"k": k})
        for n in range(min(t.max_level - 1, 6) + 1):
            if not level_partition_ok(t, n, tree):
                self.fail("level intervals do not tile [0, 1)", {"n": n})
        for trial in range(100):
            idx, vals = random_coefficients(trial_rng(self.seed, trial), 16, min(self.size, t.max_index))
            v = SparseVector(dict(zip(idx.tolist(), vals.tolist())))
            fctx = self.fctx.ctx
            if float(step_power_sum(q_map(t, fctx, v, tree), fctx)) > float(v.power_sum(fctx)) * (1 + REL_SLACK):
                self.fail("Q_p is not contractive", {"trial": trial})
        self.rows.append(scan_row("quotient", self.size, None, None, None, "quotient-kernel", True))

    def embedding(self):
        emb = B.Embedding(self.bctx)
        for trial in range(20):
            idx, vals = random_coefficients(trial_rng(self.seed, trial), 8, 16)
            x = SparseVector({int(k): Fraction(float(v)) if self.exact else float(v) for k, v in zip(idx, vals)},
                             exact=self.exact)
            y = emb.project(emb.embed(x), 16)
            if self.exact and y != x:
                self.fail("P(J(x)) != x", {"trial": trial})
            if not self.exact and max(abs(y[k] - x[k]) for k in range(1, 17)) > 1e-9:
                self.fail("P(J(x)) != x", {"trial": trial})
        self.rows.append(scan_row("embedding", 16, None, None, None, "complemented-copy", True))

    def direct_sum(self):
        layout = BlockLayout(tuple(2**k for k in range(1, 7)))
        worst = (np.inf, 0.0)
        for trial in range(100):
            r = sandwich_ratio(layout, self.fctx, random_global(layout, trial_rng(self.seed, trial), 32))
            if not (1 - 1e-9 <= r <= 2 + 1e-9):
                self.fail("direct-sum isomorphism sandwich fails", {"trial": trial, "ratio_power": r})
            worst = (min(worst[0], r), max(worst[1], r))
        self.rows.append(scan_row("direct_sum_sandwich", layout.size, worst[0], worst[1], [1, 2],
                                  "direct-sum-isomorphism", True))

    def dual(self):
        if self.p != 1:
            return
        for r in prefix_reports(self.bctx, self.size, [2**i for i in range(1, 20) if 2**i <= self.size]):
            if not r.passed:
                self.fail(f"dual quantity {r.quantity} fails", bound_row(r))
            self.rows.append(bound_row(r))


def run_battery(delta: DeltaSpec, p: float, seed: int, trials: int = 300) -> list[dict]:
    return Battery(delta, p, seed, trials).run()
