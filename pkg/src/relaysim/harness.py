"""Batch execution: seed batches, one-axis sweeps and cross-seed aggregation.

Finished runs can be cached as JSON under ``cache_dir`` keyed by config
fingerprint and seed, so re-running a sweep only simulates what is missing.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from multiprocessing import Pool

from .config import ScenarioConfig
from .metrics import Interval, ci95
from .scenario import FlowResult, RunSummary, run_scenario

log = logging.getLogger(__name__)

METRICS = ("normalized_throughput", "mean_delay_ms")


class SweepError(RuntimeError):
    def __init__(self, message: str, partial: "SweepResult"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class SweepSpec:
    axis: str                     # "attack" or "alpha"
    values: tuple
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    label: str = ""

    def __post_init__(self):
        if self.axis not in ("attack", "alpha"):
            raise ValueError(f"sweep axis must be attack or alpha, not {self.axis!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")

    def configs(self) -> list[tuple[object, ScenarioConfig]]:
        return [(v, self.base.replace(**{self.axis: v})) for v in self.values]


def summary_to_dict(s: RunSummary) -> dict:
    return dataclasses.asdict(s)


def summary_from_dict(d: dict) -> RunSummary:
    flows = {k: FlowResult(**v) for k, v in d["flows"].items()}
    return RunSummary(**{**d, "flows": flows})


def _cache_path(cache_dir: str, config: ScenarioConfig, seed: int) -> str:
    return os.path.join(cache_dir, f"{config.fingerprint()}-{seed}.json")


def _run_one(args) -> RunSummary:
    config, seed = args
    return run_scenario(config, seed)


def run_batch(config: ScenarioConfig, seeds=None, jobs: int = 1,
              cache_dir: str | None = None) -> list[RunSummary]:
    """Run ``config`` once per seed, reusing cached runs when available."""
    seeds = tuple(config.seeds if seeds is None else seeds)
    results: dict[int, RunSummary] = {}
    todo = []
    for seed in seeds:
        if cache_dir:
            path = _cache_path(cache_dir, config, seed)
            if os.path.exists(path):
                with open(path) as fh:
                    results[seed] = summary_from_dict(json.load(fh))
                continue
        todo.append(seed)
    if todo:
        log.info("running %s/%s %s x%d seeds", config.scenario, config.attack.value,
                 config.defense, len(todo))
        pool = Pool(min(jobs, len(todo))) if jobs > 1 and len(todo) > 1 else None
        try:
            fresh = (pool.imap(_run_one, [(config, s) for s in todo]) if pool
                     else (_run_one((config, s)) for s in todo))
            for seed, summary in zip(todo, fresh):
                results[seed] = summary
                if cache_dir:
                    os.makedirs(cache_dir, exist_ok=True)
                    with open(_cache_path(cache_dir, config, seed), "w") as fh:
                        json.dump(summary_to_dict(summary), fh, sort_keys=True)
        finally:
            if pool:
                pool.close()
                pool.join()
    return [results[s] for s in seeds]


@dataclass
class Row:
    value: object
    flow: str
    metric: str
    mean: float | None
    half_width: float | None
    n: int


@dataclass
class SweepResult:
    spec: SweepSpec
    runs: dict = field(default_factory=dict)    # axis value -> list[RunSummary]

    def interval(self, value, flow: str, metric: str = "normalized_throughput") -> Interval:
        return aggregate(self.runs[value], flow, metric)

    def rows(self) -> list[Row]:
        out = []
        for value in self.spec.values:
            if value not in self.runs:
                continue
            runs = self.runs[value]
            for flow in sorted(runs[0].flows):
                for metric in METRICS:
                    iv = aggregate(runs, flow, metric)
                    out.append(Row(_value_label(value), flow, metric,
                                   None if iv is None else iv.mean,
                                   None if iv is None else iv.half_width, len(runs)))
        return out


def _value_label(value):
    return getattr(value, "value", value)


def aggregate(runs: list[RunSummary], flow: str, metric: str) -> Interval | None:
    """95% CI of a per-run metric across seeds; None if no run produced a value."""
    xs = [getattr(r.flows[flow], metric) for r in runs if flow in r.flows]
    xs = [x for x in xs if x is not None]
    if not xs:
        return None
    if len(xs) == 1:
        return Interval(xs[0], 0.0)
    return ci95(xs)


def run_sweep(spec: SweepSpec, jobs: int = 1, cache_dir: str | None = None) -> SweepResult:
    result = SweepResult(spec)
    for value, config in spec.configs():
        try:
            result.runs[value] = run_batch(config, jobs=jobs, cache_dir=cache_dir)
        except Exception as exc:
            raise SweepError(f"sweep aborted at {spec.axis}={_value_label(value)}: {exc}",
                             result) from exc
    return result
