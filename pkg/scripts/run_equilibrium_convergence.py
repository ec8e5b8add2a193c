#!/usr/bin/env python3
"""Convergence study on the frozen (stationary-game) scenarios.

Best-response dynamics should settle on a pure Nash equilibrium of the
reference game; regret matching should drive the maximum average regret
toward zero on the five-radar game.  Prints per-seed convergence scans.
"""

import argparse
from dataclasses import replace

from trackgame.engine import run_realization
from trackgame.presets import frozen_preset


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="frozen-table12",
                    choices=["frozen-table12", "frozen-five-radar"])
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()

    base = frozen_preset(args.preset)
    hits = 0
    for seed in range(args.seeds):
        recs = run_realization(replace(base, seed=seed), 0)
        if args.preset == "frozen-table12":
            scan = next((r.k for r in recs if r.nash_flag), None)
            label = "first Nash scan"
        else:
            final = recs[-1].max_avg_regret
            scan = next(
                (r.k for r in recs if r.max_avg_regret <= 0.05 * recs[0].max_avg_regret),
                None,
            )
            label = f"regret<=5% of initial (final {final:.3e}) at scan"
        if scan is not None:
            hits += 1
        print(f"seed {seed}: {label} {scan}")
    print(f"{hits}/{args.seeds} seeds converged")


if __name__ == "__main__":
    main()
