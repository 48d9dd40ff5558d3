"""Sum-rate ratio and convergence for the i.i.d., EPA and asynchronous scenarios."""

import argparse
from pathlib import Path

import numpy as np

from fsigsim import experiments, results
from fsigsim.config import load_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--realizations", type=int, default=100)
    ap.add_argument("--jobs", type=int)
    ap.add_argument("--out", default="results/scenarios")
    args = ap.parse_args()

    rows = []
    for name in ("default", "epa", "async"):
        cfg = load_config(CONFIGS / f"{name}.yaml").with_(n_realizations=args.realizations)
        recs = experiments.run_scenario(cfg, args.jobs)
        results.write_records(recs, Path(args.out) / f"records_{name}.csv")
        conv = [r for r in recs if r.converged]
        ratio = float(np.mean([r.sum_rate / r.optimal_sum_rate for r in conv])) if conv else float("nan")
        rows.append((name, cfg.n_users, cfg.m, len(conv) / len(recs), ratio))
        print(f"{name:8s} N={cfg.n_users} M={cfg.m} converged={len(conv) / len(recs):.2f} ratio={ratio:.3f}")
    results.write_rows(Path(args.out) / "summary.csv",
                       ["scenario", "n_users", "m_best", "converged_fraction", "mean_ratio"], rows)


if __name__ == "__main__":
    main()
