#!/usr/bin/env python3
"""Run the desk-scale benchmark grid and print the summary tables.

Equivalent to `bnorder bench scripts/desk.cfg` followed by the stats
subcommand for each covered factor, kept as one script so a single
invocation regenerates the results CSV and both tables.
"""

import argparse
import os
import sys
import time
from dataclasses import replace

HERE = os.path.dirname(os.path.abspath(__file__))

try:
    from bnorder.bench import (
        impact_summary,
        parse_config,
        rank_table,
        run_matrix,
        write_results_csv,
    )
except ImportError:  # running from a checkout without installation
    sys.path.insert(0, os.path.join(os.path.dirname(HERE), "src"))
    from bnorder.bench import (
        impact_summary,
        parse_config,
        rank_table,
        run_matrix,
        write_results_csv,
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--config",
        default=os.path.join(HERE, "desk.cfg"),
        help="experiment config (default: the bundled desk grid)",
    )
    ap.add_argument(
        "--workers",
        type=int,
        default=None,
        help="override the worker count from the config",
    )
    args = ap.parse_args()

    with open(args.config) as fh:
        cfg = parse_config(fh.read(), base_dir=os.path.dirname(args.config))
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)

    started = time.perf_counter()
    rows = run_matrix(cfg)
    elapsed = time.perf_counter() - started

    os.makedirs(os.path.dirname(cfg.output) or ".", exist_ok=True)
    write_results_csv(rows, cfg.output)
    bad = [r for r in rows if r.status != "ok"]
    print(f"{len(rows)} rows in {elapsed:.1f} s -> {cfg.output}")
    if bad:
        print(f"warning: {len(bad)} rows did not finish cleanly:")
        for r in bad:
            print(f"  {r.network} {r.algorithm} {r.ordering_mode} "
                  f"seed {r.seed} N {r.sample_size}: {r.status}")

    print()
    print("F1 change when one factor moves (positive = improvement):")
    for factor in (
        "worst_to_optimal",
        "alphabetic_to_optimal",
        "size_x10",
        "size_x100",
    ):
        s = impact_summary(rows, factor)
        print(
            f"  {s.factor:<22} mean {s.mean:+.3f}  median {s.median:+.3f}  "
            f"iqr [{s.q1:+.3f}, {s.q3:+.3f}]  "
            f"range [{s.min:+.3f}, {s.max:+.3f}]  n={s.n}"
        )

    table = rank_table(rows)
    print()
    print(f"Mean F1 against {table.baseline}, by ordering:")
    for algorithm, groups in table.deltas.items():
        cells = "  ".join(
            f"{group} {delta:+.3f}" for group, delta in groups.items()
        )
        print(f"  {algorithm:<9} {cells}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
