"""Desk-scale run of the simulation benchmark.

Runs a reduced-replication version of the two benchmark designs and
prints the summary table. With default settings this takes a couple of
minutes; pass --reps/--sizes to scale it up or down, or use the CLI
(`glfit simulate`) to write the CSV reports.
"""

import argparse

from glfit import builtin_scenarios, run_scenarios, summarize

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--reps", type=int, default=20)
parser.add_argument("--sizes", default="30,100")
parser.add_argument("--jobs", type=int, default=1)
parser.add_argument("--seed", type=int, default=20240801)
args = parser.parse_args()

sizes = [int(s) for s in args.sizes.split(",")]

for part in (1, 2):
    methods = ("gq_nm_h20", "gq_qn_h20", "direct_ml") if part == 1 else None
    scenarios = builtin_scenarios(
        part, sizes=sizes, replications=args.reps, base_seed=args.seed, methods=methods
    )
    print(f"\n=== Part {part}: {len(scenarios)} scenarios x {args.reps} replications ===")
    records = run_scenarios(scenarios, jobs=args.jobs)
    table = summarize(records)
    print(f"{'scenario':<18} {'method':<12} {'mse_ev':>8} {'mse_var':>9} "
          f"{'loglik':>10} {'time_s':>8} {'fail':>5}")
    for c in table.cells:
        mse_ev = f"{c.mse_ev:.3f}" if c.mse_ev is not None else "-"
        mse_var = f"{c.mse_var:.1f}" if c.mse_var is not None else "-"
        loglik = f"{c.mean_loglik:.2f}" if c.mean_loglik is not None else "-"
        t = f"{c.mean_time_s:.3f}" if c.mean_time_s is not None else "-"
        print(f"{c.scenario:<18} {c.method:<12} {mse_ev:>8} {mse_var:>9} "
              f"{loglik:>10} {t:>8} {c.failure_prop:>5.2f}")
