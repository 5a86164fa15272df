"""Command-line entry point.

    relaysim run        one configuration over a seed batch
    relaysim sweep      one axis (attack or alpha) over a seed batch per value
    relaysim acceptance the full criteria grid

Every command writes CSV tables, an SVG chart, ``config.json`` and an
``acceptance.txt`` covering whichever criteria its data supports. Exit status
is 0 when all evaluated criteria pass, 1 when one fails, 2 on a bad
configuration and 3 when the output directory cannot be written.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

from . import acceptance as acc
from .attack import AttackStrategy
from .config import ConfigError, ScenarioConfig, from_dict, load
from .harness import SweepResult, SweepSpec, SweepError, run_batch, run_sweep
from .report import ReportError, emit_report, runs_csv
from .scenario import Network

log = logging.getLogger("relaysim")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def parse_seeds(text: str) -> tuple[int, ...]:
    """``20`` means 1..20; ``3-7`` a range; ``1,4,9`` a list."""
    text = text.strip()
    try:
        if "," in text:
            seeds = tuple(int(x) for x in text.split(",") if x.strip())
        elif "-" in text[1:]:
            lo, hi = text.split("-", 1)
            seeds = tuple(range(int(lo), int(hi) + 1))
        else:
            seeds = tuple(range(1, int(text) + 1))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return seeds


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON configuration file (times in seconds)")
    p.add_argument("--scenario", choices=["uplink", "downlink"])
    p.add_argument("--transit-direction", choices=["up", "down"])
    p.add_argument("--attack", help="None, BoaUp, BoaDown, TwoBoa, TraUp, TraDown, TwoTra")
    p.add_argument("--defense", choices=["Off", "AckDrop", "Shape"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--seeds", type=parse_seeds, help="N, A-B or a comma list")
    p.add_argument("--duration", type=float, help="seconds")
    p.add_argument("--warmup", type=float, help="seconds")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--log-events", action="store_true",
                   help="also write channel, queue and delivery logs per seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel runs")
    p.add_argument("--cache", help="directory for cached per-run results")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaysim",
                                     description="Selfish EDCA relay simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="run one configuration"))
    sw = sub.add_parser("sweep", help="sweep attack strategies or alpha")
    _common(sw)
    sw.add_argument("--axis", choices=["attack", "alpha"], required=True)
    sw.add_argument("--values", default=None,
                    help="comma list; default: all strategies or alpha 0,0.1,...,1")
    ac = sub.add_parser("acceptance", help="evaluate every acceptance criterion")
    _common(ac)
    ac.add_argument("--only", help="comma list of criterion ids, e.g. A1,A8")
    ac.set_defaults(cache=".cache/acceptance")
    return parser


def config_from_args(args) -> ScenarioConfig:
    config = load(args.config) if args.config else ScenarioConfig()
    flags = {
        "scenario": args.scenario,
        "transit_direction": args.transit_direction,
        "attack": args.attack,
        "defense": args.defense,
        "alpha": args.alpha,
        "duration": args.duration,
        "warmup": args.warmup,
        "seeds": list(args.seeds) if args.seeds else None,
    }
    changes = {k: v for k, v in flags.items() if v is not None}
    return from_dict(changes, config)


def _sweep_values(axis: str, text: str | None) -> tuple:
    if axis == "attack":
        if text is None:
            return acc.STRATEGIES
        return tuple(AttackStrategy.parse(v) for v in text.split(",") if v.strip())
    if text is None:
        return acc.ALPHAS
    return tuple(float(v) for v in text.split(",") if v.strip())


def _write_event_logs(config: ScenarioConfig, out: str) -> None:
    for seed in config.seeds:
        net = Network(config, seed, log_events=True)
        net.run()
        d = os.path.join(out, "events", f"seed-{seed}")
        os.makedirs(d, exist_ok=True)
        for name, rows, header in (
                ("channel.csv", net.channel_log,
                 ["event", "time_ns", "node", "frame", "peer", "flag", "other_ns"]),
                ("queue.csv", net.packet_log,
                 ["event", "time_ns", "node", "flow", "packet", "ac", "dscp", "queue_len"]),
                ("delivery.csv", net.delivery_log,
                 ["flow", "bytes", "created_ns", "delivered_ns", "dscp_origin", "dscp_final"])):
            with open(os.path.join(d, name), "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\r\n")
                w.writerow(header)
                w.writerows(rows)


def _finish(results: list, out: str, sweep: SweepResult | None, prefix: str) -> int:
    emit_report(sweep, out, prefix, acceptance=results)
    for r in results:
        print(f"{r.id} {'PASS' if r.passed else 'FAIL'}  {r.detail}")
        for note in r.notes:
            print(f"    {note}")
    if not results:
        print("no acceptance criterion is covered by this data")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_run(args, config: ScenarioConfig) -> int:
    runs = run_batch(config, jobs=args.jobs, cache_dir=args.cache)
    spec = SweepSpec("attack", (config.attack,), config)
    result = SweepResult(spec, {config.attack: runs})
    with open(os.path.join(args.out, f"{config.scenario}_runs.csv"), "w", newline="") as fh:
        fh.write(runs_csv(runs))
    if args.log_events:
        _write_event_logs(config, args.out)
    grid = acc.Grid(config, offline=True)
    grid.add(config, runs)
    return _finish(acc.evaluate_available(grid), args.out, result, config.scenario)


def cmd_sweep(args, config: ScenarioConfig) -> int:
    spec = SweepSpec(args.axis, _sweep_values(args.axis, args.values), config)
    try:
        result = run_sweep(spec, jobs=args.jobs, cache_dir=args.cache)
    except SweepError as exc:
        log.error("%s", exc)
        emit_report(exc.partial, args.out, f"{config.scenario}_partial")
        return EXIT_FAIL
    runs = [r for v in spec.values for r in result.runs[v]]
    with open(os.path.join(args.out, f"{config.scenario}_runs.csv"), "w", newline="") as fh:
        fh.write(runs_csv(runs))
    grid = acc.Grid(config, offline=True)
    for value, cfg in spec.configs():
        grid.add(cfg, result.runs[value])
    if args.axis == "alpha" and config.defense != "Off":
        # the unpunished reference the alpha criteria compare against
        ref = config.replace(defense="Off", alpha=1.0)
        grid.add(ref, run_batch(ref, jobs=args.jobs, cache_dir=args.cache))
    return _finish(acc.evaluate_available(grid), args.out, result, config.scenario)


def cmd_acceptance(args, config: ScenarioConfig) -> int:
    grid = acc.Grid(config, jobs=args.jobs, cache_dir=args.cache,
                    progress=lambda c: log.info("batch %s %s %s alpha=%s", c.scenario,
                                                c.attack.value, c.defense, c.alpha))
    ids = [i.strip().upper() for i in args.only.split(",")] if args.only else None
    if ids and any(i not in acc.CRITERIA for i in ids):
        raise ConfigError(f"unknown criterion in {args.only!r}")
    results = acc.evaluate(grid, ids)
    # figure-style tables from the batches the criteria already ran
    specs = [(SweepSpec("attack", acc.STRATEGIES, grid.attack(sc, AttackStrategy.NONE)), sc)
             for sc in ("uplink", "downlink")]
    specs += [(SweepSpec("alpha", acc.ALPHAS, grid.defended(kind, 1.0)), f"alpha_{kind.lower()}")
              for kind in ("Shape", "AckDrop")]
    for spec, prefix in specs:
        if all(grid.has(c) for _, c in spec.configs()):
            runs = {v: grid.runs(c) for v, c in spec.configs()}
            emit_report(SweepResult(spec, runs), args.out, prefix)
    return _finish(results, args.out, None, "acceptance")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = config_from_args(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"relaysim: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "config.json"), "w") as fh:
            json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        commands = {"run": cmd_run, "sweep": cmd_sweep, "acceptance": cmd_acceptance}
        return commands[args.command](args, config)
    except ConfigError as exc:
        print(f"relaysim: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ReportError, OSError) as exc:
        print(f"relaysim: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
