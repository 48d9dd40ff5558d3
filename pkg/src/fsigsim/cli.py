"""Command-line entry point: ``fsigsim {run,sweep,cdf,matching,orderstats}``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import experiments, results
from .config import ScenarioConfig, load_config

log = logging.getLogger("fsigsim")


def _base_config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    changes = {}
    if args.seed is not None:
        changes["base_seed"] = args.seed
        changes["seeds"] = None
    if args.realizations is not None:
        changes["n_realizations"] = args.realizations
    if getattr(args, "n", None) is not None:
        changes["n_users"] = args.n
    if getattr(args, "m", None) is not None:
        changes["m_best"] = args.m
    return cfg.with_(**changes) if changes else cfg


def _failures(records) -> int:
    bad = [r for r in records if r.error]
    for r in bad:
        log.error("seed %s: %s", r.seed, r.error)
    return len(bad)


def cmd_run(args) -> int:
    cfg = _base_config(args)
    out = Path(args.out)
    records = experiments.run_scenario(cfg, args.jobs)
    results.write_records(records, out / "records.csv")
    conv = [r for r in records if r.converged]
    results.write_summary(out / "summary.json", cfg, n_records=len(records),
                          converged=len(conv),
                          mean_ratio=(sum(r.sum_rate / r.optimal_sum_rate for r in conv) / len(conv)
                                      if conv else None))
    print(f"{len(conv)}/{len(records)} realizations converged; results in {out}")
    return 1 if _failures(records) else 0


def cmd_sweep(args) -> int:
    base = _base_config(args)
    configs = []
    for n in args.ns:
        m = 5 if n == 10 and not args.log_rule_m else None
        configs.append(base.with_(n_users=n, n_res=None, m_best=m))
    rows = experiments.rates_vs_n(configs, args.jobs)
    out = Path(args.out)
    results.write_dataclass_rows(rows, out / "rates_vs_n.csv")
    results.write_rates_long(rows, out / "rates_vs_n_long.csv")
    results.write_summary(out / "summary.json", base, ns=list(args.ns), rows=rows)
    for r in rows:
        print(f"N={r.n_users:4d} M={r.m_best:3d} mean={r.mean_rate:.3f} min={r.min_rate:.3f} "
              f"opt={r.optimal_mean_rate:.3f} random={r.random_mean_rate:.3f}")
    return 0


def cmd_cdf(args) -> int:
    base = _base_config(args)
    tables, failures = {}, 0
    out = Path(args.out)
    for n in args.ns:
        cfg = base.with_(n_users=n, n_res=None, m_best=5 if n == 10 and not args.log_rule_m else None)
        records = experiments.run_scenario(cfg, args.jobs)
        failures += _failures(records)
        tables[n] = experiments.convergence_cdf(records, cfg.fp.max_turns)
        results.write_records(records, out / f"records_n{n}.csv")
        print(f"N={n}: {experiments.fraction_converged_by(records, 40):.2f} converged by turn 40")
    results.write_cdf(tables, out / "convergence_cdf.csv")
    results.write_summary(out / "summary.json", base, ns=list(args.ns))
    return 1 if failures else 0


def cmd_matching(args) -> int:
    rows = []
    for n in args.ns:
        m = args.m or math.ceil(args.coeff * math.log(n))
        rows.extend(experiments.matching_study(n, m, args.realizations or 100, args.seed or 0))
    out = Path(args.out)
    results.write_dataclass_rows(rows, out / "perfect_matching.csv")
    results.write_summary(out / "summary.json", None, rows=rows)
    for r in rows:
        print(f"N={r.n} M={r.m} {r.mode}: perfect matching in {r.perfect_fraction:.2%}")
    return 0


def cmd_orderstats(args) -> int:
    exponent = args.exponent
    rows = experiments.orderstats_study(
        args.ks, lambda k: math.ceil(args.coeff * math.log(k) ** exponent),
        args.realizations or 1000, args.seed or 0)
    out = Path(args.out)
    results.write_dataclass_rows(rows, out / "orderstats.csv")
    results.write_summary(out / "summary.json", None, rows=rows)
    for r in rows:
        print(f"{r.family:12s} K={r.k:6d} M={r.m:3d} mean ratio={r.mean_ratio:.3f} "
              f"P[max<=U_K]={r.upper_coverage:.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsigsim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario YAML file")
        p.add_argument("--seed", type=int, help="base seed")
        p.add_argument("--realizations", type=int, help="number of realizations")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--jobs", type=int, help=f"worker processes (default ${experiments.JOBS_ENV} or 1)")
        return p

    p = common(sub.add_parser("run", help="run a single scenario"))
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.set_defaults(func=cmd_run)

    for name, func, default_ns, text in (
            ("sweep", cmd_sweep, [10, 25, 50, 75, 100], "rates as a function of N"),
            ("cdf", cmd_cdf, [10, 100, 200, 300, 400], "convergence-time CDFs")):
        p = common(sub.add_parser(name, help=text))
        p.add_argument("--ns", type=int, nargs="+", default=default_ns)
        p.add_argument("--log-rule-m", dest="log_rule_m", action="store_true",
                       help="use the ceil(c ln N) rule for N=10 as well (default uses M=5)")
        p.set_defaults(func=func)

    p = common(sub.add_parser("matching", help="perfect-matching probability study"))
    p.add_argument("--ns", type=int, nargs="+", default=[25, 50, 100])
    p.add_argument("--m", type=int)
    p.add_argument("--coeff", type=float, default=3.0)
    p.set_defaults(func=cmd_matching)

    p = common(sub.add_parser("orderstats", help="order-statistics ratio and bound studies"))
    p.add_argument("--ks", type=int, nargs="+", default=[100, 1000, 10000])
    p.add_argument("--coeff", type=float, default=1.0)
    p.add_argument("--exponent", type=float, default=0.9, help="M = ceil(coeff * ln(K)^exponent)")
    p.set_defaults(func=cmd_orderstats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
