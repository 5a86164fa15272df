"""Honest uplink under one-hop versus two-hop carrier sensing.

With one-hop sensing B and the AP cannot hear each other, both restart their
countdowns when A goes quiet, and their RTS frames collide at A. The transit
flow then loses to the relay's own flow, the opposite of the baseline
ordering. This script prints both cases side by side.

    python scripts/sensing_range_ablation.py [--seeds 5] [--duration 45]
"""

import argparse

from relaysim.config import ScenarioConfig, seconds
from relaysim.harness import aggregate, run_batch


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--duration", type=float, default=45)
    args = ap.parse_args()
    for cs in (1, 2):
        for eifs in (False, True):
            c = ScenarioConfig(cs_range=cs, eifs=eifs, duration=seconds(args.duration),
                               seeds=tuple(range(1, args.seeds + 1)))
            runs = run_batch(c)
            s, t = aggregate(runs, "S", "normalized_throughput"), aggregate(
                runs, "T", "normalized_throughput")
            d = aggregate(runs, "T", "mean_delay_ms")
            print(f"cs_range={cs} eifs={eifs!s:5}  S={s.mean:.4f}±{s.half_width:.4f}"
                  f"  T={t.mean:.4f}±{t.half_width:.4f}"
                  f"  delay(T)={'n/a' if d is None else f'{d.mean:.0f} ms'}")


if __name__ == "__main__":
    main()
