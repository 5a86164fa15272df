"""Defense sweeps: relay throughput against alpha for shaping and ACK dropping.

    python scripts/reproduce_fig3.py --out results/fig3 [--attack TraDown]

The attack defaults to the downgrade used by the acceptance grid; pass
``--attack TraUp`` to look at the upgrade case, where ACK dropping is
sensitive to hidden-terminal effects.
"""

import argparse
import logging

from relaysim.acceptance import ALPHAS
from relaysim.config import ScenarioConfig
from relaysim.harness import SweepSpec, run_sweep
from relaysim.report import emit_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/fig3")
    ap.add_argument("--attack", default="TraDown")
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--cache", default=".cache/acceptance")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    seeds = tuple(range(1, args.seeds + 1))
    for kind in ("Shape", "AckDrop"):
        base = ScenarioConfig(attack=args.attack, defense=kind, seeds=seeds)
        result = run_sweep(SweepSpec("alpha", ALPHAS, base), args.jobs, args.cache)
        prefix = f"{kind.lower()}_{base.attack.value}"
        for path in emit_report(result, args.out, prefix):
            print(path)
        for r in result.rows():
            if r.metric == "normalized_throughput":
                print(f"  {kind:7s} alpha={r.value:<4} {r.flow:2s} {r.mean:.4f} ± {r.half_width:.4f}")


if __name__ == "__main__":
    main()
