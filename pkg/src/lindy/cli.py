"""``lindy`` command-line front end.

Exit codes: 0 success, 1 invariant violation (or a failed bound row),
2 malformed configuration, 3 capacity exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .basis import BasisContext, basis_vector, biorthogonality_defects, dual_vector
from .conditionality import delta_s_bound, km_complement_bounds, sandwich_reports
from .directsum import directsum_conditionality, directsum_qg_scan, parse_eta, random_global, sandwich_ratio
from .dual import column_q_bound, phi_upper_scan, prefix_reports, sparse_level_sum
from .errors import CapacityExceeded, ConfigError, InvariantViolation, LindyError
from .greedy import democracy_scan, lebesgue_bounds, quasi_greedy_scan, trial_rng
from .indexing import DeltaSpec, IndexTables, parse_delta, write_delta_table
from .quotient import IntervalTree, level_partition_ok, q_map
from .report import all_pass, bound_row, plain, render, scan_row
from .sparse import PContext
from .synthesis import ConcaveSpec, delta_from_concave, delta_from_milestones, validate_milestones
from .verify import run_battery

DEFAULT_GRID_TOP = 4096


@dataclass
class ExperimentConfig:
    p: float
    delta: DeltaSpec
    eta: str | None
    m: list[int] | None
    trials: int
    seed: int
    exact: bool
    fmt: str
    out: str | None

    def grid(self, top: int = DEFAULT_GRID_TOP, start: int = 2) -> list[int]:
        if self.m is not None:
            return self.m
        out, m = [], start
        while m <= top:
            out.append(m)
            m *= 2
        return out


def parse_grid(text: str) -> list[int]:
    """``a..b`` (every integer), ``2^a..2^b`` (powers of two), ``a,b,...,c``
    (arithmetic progression) or a plain comma list.  Must be strictly increasing."""
    text = text.replace(" ", "")
    try:
        if ".." in text and "," not in text and "..." not in text:
            lo, hi = text.split("..")
            if lo.startswith("2^") and hi.startswith("2^"):
                vals = [2**e for e in range(int(lo[2:]), int(hi[2:]) + 1)]
            else:
                vals = list(range(int(lo), int(hi) + 1))
        else:
            parts = text.split(",")
            vals = []
            i = 0
            while i < len(parts):
                if parts[i] == "...":
                    if len(vals) < 2 or i + 1 >= len(parts):
                        raise ConfigError("'...' needs two leading terms and an end")
                    step, end = vals[-1] - vals[-2], int(parts[i + 1])
                    if step <= 0:
                        raise ConfigError("progression must increase")
                    vals.extend(range(vals[-1] + step, end + 1, step))
                    if vals[-1] != end:
                        raise ConfigError(f"{end} is not on the progression")
                    i += 2
                    continue
                vals.append(int(parts[i]))
                i += 1
    except ValueError as exc:
        raise ConfigError(f"malformed m grid {text!r}") from exc
    if not vals or vals[0] < 1 or any(a >= b for a, b in zip(vals, vals[1:])):
        raise ConfigError("m grid must be positive and strictly increasing")
    return vals


def _delta_from_args(args) -> DeltaSpec:
    if getattr(args, "phi", None):
        return delta_from_concave(ConcaveSpec.parse(args.phi, args.len)).delta
    return parse_delta(args.delta)


def _config(args) -> ExperimentConfig:
    ctx = PContext.parse(args.p, args.exact)  # validates p and exactness
    return ExperimentConfig(
        p=ctx.p, delta=_delta_from_args(args), eta=getattr(args, "eta", None),
        m=parse_grid(args.m) if args.m else None, trials=args.trials, seed=args.seed,
        exact=args.exact, fmt=args.format, out=args.out,
    )


def _emit(cfg: ExperimentConfig, text: str) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _bctx(cfg: ExperimentConfig, n_basis: int) -> BasisContext:
    return BasisContext.build(cfg.delta, cfg.p, n_basis, exact=cfg.exact)


# ---------------------------------------------------------------- subcommands


def cmd_indexing(cfg, args) -> list[dict]:
    grid = cfg.grid(64, 1) if cfg.m is None else cfg.m
    t = IndexTables.covering(cfg.delta, max(grid))
    rows = []
    for m in grid:
        rows.append({"m": m, "d": t.dn(m), "sigma": t.sigma(m), "rho": t.rho(m) if m > 1 else None,
                     "gamma": t.gamma(m), "block": list(t.block_interval(m, 1)),
                     "lambda": t.lambda_cap(m) if m <= t.max_level else None})
    return rows


def cmd_synthesize(cfg, args) -> list[dict]:
    if args.milestones:
        M = [int(x) for x in args.milestones.split(",")]
        ok, bad = validate_milestones(M)
        if not ok:
            raise ConfigError(f"milestones fail the admissibility test at n={bad}")
        delta = delta_from_milestones(M)
        diag = {"milestones": M, "delta_terms": len(delta.values), "tail": delta.tail}
    else:
        if not args.phi:
            raise ConfigError("synthesize needs --phi or --milestones")
        res = delta_from_concave(ConcaveSpec.parse(args.phi, args.len))
        delta, diag = res.delta, res.diagnostics()
        for note in res.notes:
            print(f"warning: {note}", file=sys.stderr)
    if args.table:
        write_delta_table(delta.values, args.table)
    M = diag["milestones"]
    t = IndexTables(delta, max(M[-2], 2))
    rebuilt = [t.lambda_cap(n) for n in range(len(M))]
    rows = [{"n": n, "milestone": M[n], "lambda": rebuilt[n], "pass": rebuilt[n] == M[n]} for n in range(len(M))]
    if cfg.fmt == "json":
        diag = {k: plain(v) if not isinstance(v, list) else v for k, v in diag.items()}
        return [{"diagnostics": diag, "levels": rows}]
    return rows


def cmd_basis(cfg, args) -> list[dict]:
    grid = cfg.grid(512, 1)
    top = max(grid)
    bctx = _bctx(cfg, top)
    rows = []
    for k in grid:
        s = basis_vector(bctx, k).power_sum(bctx.ctx)
        sup = dual_vector(bctx, k).sup_norm()
        rows.append(scan_row("basis_norm_power", k, s, s, 2, "normalized", abs(float(s) - 2) <= 1e-9))
        rows.append(scan_row("dual_sup_norm", k, sup, sup, 1, "normalized-dual", float(sup) == 1))
    bad = biorthogonality_defects(bctx, top)
    worst = max((abs(float(v) - (j == k)) for j, k, v in bad), default=0.0)
    ok = not bad if cfg.exact else worst <= 1e-9
    rows.append(scan_row("biorthogonality_defect", top, 0, worst, 0, "biorthogonal", ok, defects=len(bad)))
    return rows


def cmd_greedy(cfg, args) -> list[dict]:
    bctx = BasisContext.build(cfg.delta, cfg.p, max(args.max_support, 4 * 1024), exact=False)
    rows = []
    for r in quasi_greedy_scan(bctx, cfg.trials, args.max_support, cfg.seed):
        rows.append(scan_row(r.quantity, r.m, None, r.worst, r.bound, "quasi-greedy", r.passed,
                             trial=r.trial, trials=r.count))
    grid = [m for m in cfg.grid(1024, 1) if 4 * m <= bctx.horizon]
    for d in democracy_scan(bctx, grid, min(cfg.trials, 50), cfg.seed):
        rows.append(scan_row("democracy", d["m"], d["min"], d["max"], [d["lower_bound"], d["upper_bound"]],
                             "democracy", d["pass"]))
        rows.append(scan_row("democracy_ptriangle", d["m"], d["min"], d["max"],
                             [d["lower_bound"], d["upper_ptriangle"]], "democracy-p-triangle", d["pass_ptriangle"]))
    return rows


def cmd_constants(cfg, args) -> list[dict]:
    grid = cfg.grid()
    bctx = _bctx(cfg, max(grid))
    rows = []
    for r in sandwich_reports(bctx, grid):
        if not cfg.delta.nondecreasing:
            r.passed = r.lower <= r.upper
        rows.append(bound_row(r))
        lo_c, hi_c = km_complement_bounds(cfg.p, r.lower, r.upper)
        rows.append(scan_row("k_m_complement", r.m, lo_c, hi_c, None, "complement-arithmetic", lo_c <= hi_c))
        lo_l, hi_l = lebesgue_bounds(cfg.p, (lo_c, hi_c), delta_s_bound(cfg.p))
        rows.append(scan_row("lebesgue", r.m, lo_l, hi_l, None, "lebesgue-arithmetic", lo_l <= hi_l))
    return rows


def cmd_quotient(cfg, args) -> list[dict]:
    grid = cfg.grid(256, 1)
    top = max(grid)
    bctx = _bctx(cfg, top)
    t, ctx = bctx.tables, bctx.ctx
    tree = IntervalTree(t)
    rows = []
    for k in grid:
        f = q_map(t, ctx, basis_vector(bctx, k), tree)
        rows.append(scan_row("quotient_kernel", k, None, None, 0, "quotient-kernel", f.is_zero,
                             pieces=len(f.values)))
    for n in range(min(t.max_level - 1, 6) + 1):
        rows.append(scan_row("level_partition", n, None, None, None, "interval-partition",
                             level_partition_ok(t, n, tree)))
    return rows


def cmd_directsum(cfg, args) -> list[dict]:
    layout = parse_eta(cfg.eta or "geom:2", args.blocks)
    big = max(layout.eta)
    grid = cfg.grid(min(big, DEFAULT_GRID_TOP))
    bctx = _bctx(cfg, max(big, max(grid)))
    rows = [bound_row(r) for r in directsum_conditionality(layout, bctx, grid)]
    fctx = BasisContext.build(cfg.delta, cfg.p, big, exact=False)
    q = directsum_qg_scan(layout, fctx, min(cfg.trials, 1000), args.max_support, cfg.seed)
    rows.append(scan_row("residual_ratio", layout.size, None, q["residual_ratio"], q["residual_bound"],
                         "direct-sum-quasi-greedy", q["residual_ratio"] <= q["residual_bound"] * (1 + 1e-9)))
    rows.append(scan_row("projection_ratio", layout.size, None, q["projection_ratio"], q["projection_bound"],
                         "direct-sum-quasi-greedy", q["projection_ratio"] <= q["projection_bound"] * (1 + 1e-9)))
    ratios = [sandwich_ratio(layout, fctx, random_global(layout, trial_rng(cfg.seed, t), args.max_support))
              for t in range(min(cfg.trials, 200))]
    lo, hi = min(ratios) ** (1 / cfg.p), max(ratios) ** (1 / cfg.p)
    rows.append(scan_row("isomorphism_sandwich", layout.size, lo, hi, [1, 2 ** (1 / cfg.p)],
                         "direct-sum-isomorphism", lo >= 1 - 1e-9 and hi <= 2 ** (1 / cfg.p) * (1 + 1e-9)))
    return rows


def cmd_dual(cfg, args) -> list[dict]:
    grid = cfg.grid()
    top = max(grid)
    bctx = _bctx(cfg, top)
    rows = []
    if cfg.p == 1:
        rows.extend(bound_row(r) for r in prefix_reports(bctx, top, grid))
        for d in phi_upper_scan(bctx, [m for m in grid if m <= 256], min(cfg.trials, 20), cfg.seed, top):
            rows.append(scan_row("phi_upper", d["m"], None, d["worst"], d["bound"], "dual-democracy", d["pass"]))
    t = bctx.tables
    for n in range(t.max_level + 1):
        v = sparse_level_sum(bctx, n)
        rows.append(scan_row("sparse_level_sum", n, None, v, 2, "dual-sparse-levels", v <= 2))
    for q in (1.0,) if cfg.p < 1 else ():
        s, b = column_q_bound(bctx, 1, q)
        rows.append(scan_row("column_q_sum", 1, None, s, b, "column-q-sum", s <= b))
    return rows


def cmd_verify(cfg, args) -> list[dict]:
    return run_battery(cfg.delta, cfg.p, cfg.seed, min(cfg.trials, 300))


COMMANDS = {
    "indexing": (cmd_indexing, "sigma, rho, Gamma and Lambda on a grid"),
    "synthesize": (cmd_synthesize, "build delta from milestones or a concave function"),
    "basis": (cmd_basis, "norm facts and biorthogonality of the basis"),
    "greedy": (cmd_greedy, "quasi-greedy and democracy scans"),
    "constants": (cmd_constants, "conditionality bounds and Lebesgue arithmetic"),
    "quotient": (cmd_quotient, "kernel and partition checks of the quotient map"),
    "directsum": (cmd_directsum, "measurements on direct sums of sections"),
    "dual": (cmd_dual, "dual-basis sup-norm quantities"),
    "verify": (cmd_verify, "run the full property battery"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lindy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", default="1", help="exponent in (0, 1], e.g. 1 or 1/2")
    common.add_argument("--delta", default="const:2", help="const:<c> | list:<...>[;tail=<c>] | pow:<a> | table:<file>")
    common.add_argument("--phi", help="synthesize delta from power:<c> or log1p instead of --delta")
    common.add_argument("--len", type=int, default=7, help="number of levels for --phi")
    common.add_argument("--eta", help="block sizes: geom:<r> | linear | list:<n1,...>")
    common.add_argument("--blocks", type=int, default=12)
    common.add_argument("--m", help="grid: a..b | 2^a..2^b | a,b,...,c | comma list")
    common.add_argument("--trials", type=int, default=10000)
    common.add_argument("--max-support", type=int, default=2048)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--exact", action="store_true", help="rational arithmetic (needs 1/p integer)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if name == "synthesize":
            sp.add_argument("--milestones", help="comma list M_0, M_1, ...")
            sp.add_argument("--table", help="write the delta table to this file")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.trials < 1 or args.max_support < 1 or args.blocks < 1:
            raise ConfigError("--trials, --max-support and --blocks must be positive")
        cfg = _config(args)
        fn, _ = COMMANDS[args.command]
        rows = fn(cfg, args)
        _emit(cfg, render(rows, cfg.fmt))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityExceeded as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        print("witness: " + json.dumps(exc.witness, default=str, sort_keys=True), file=sys.stderr)
        return 1
    except LindyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if all_pass(rows if args.command != "synthesize" or cfg.fmt == "csv" else rows[0]["levels"]) else 1


if __name__ == "__main__":
    sys.exit(main())
