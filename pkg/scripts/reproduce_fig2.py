"""Attack sweeps for both scenarios: throughput and delay per strategy.

    python scripts/reproduce_fig2.py --out results/fig2 [--seeds 20] [--jobs 1]

Writes {uplink,downlink}_throughput.csv, _delay.csv and .svg. Shares the
acceptance cache, so after ``relaysim acceptance`` this runs no simulations.
"""

import argparse
import logging

from relaysim.acceptance import STRATEGIES
from relaysim.config import ScenarioConfig
from relaysim.harness import SweepSpec, run_sweep
from relaysim.report import emit_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/fig2")
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--cache", default=".cache/acceptance")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    for scenario in ("uplink", "downlink"):
        base = ScenarioConfig(scenario=scenario, seeds=tuple(range(1, args.seeds + 1)))
        result = run_sweep(SweepSpec("attack", STRATEGIES, base), args.jobs, args.cache)
        for path in emit_report(result, args.out, scenario):
            print(path)
        own = "S" if scenario == "uplink" else "S'"
        for r in result.rows():
            if r.metric == "normalized_throughput" and r.flow in (own, "T"):
                print(f"  {scenario:8s} {r.value:8s} {r.flow:3s} {r.mean:.4f} ± {r.half_width:.4f}")


if __name__ == "__main__":
    main()
