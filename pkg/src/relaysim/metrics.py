"""Per-flow QoS accounting and cross-seed aggregation."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

from scipy import stats as _st

from .engine import MS, SEC

ITU_DELAY_BOUND_MS = 100.0
DROP_CAUSES = ("mac-queue", "retry-limit", "shaper")


@dataclass
class FlowStats:
    flow: str
    warmup: int = 15 * SEC
    bits_delivered: int = 0
    packets_delivered: int = 0
    delay_samples: list[int] = field(default_factory=list)
    drops: dict[str, int] = field(default_factory=lambda: {c: 0 for c in DROP_CAUSES})

    def record_delivery(self, payload_bytes: int, created_at: int, delivered_at: int) -> None:
        if created_at < self.warmup or delivered_at < self.warmup:
            return
        self.bits_delivered += payload_bytes * 8
        self.packets_delivered += 1
        self.delay_samples.append(delivered_at - created_at)

    def record_drop(self, cause: str, now: int) -> None:
        if now >= self.warmup:
            self.drops[cause] += 1


def throughput(stats: FlowStats, interval: int, phy_rate: int) -> float:
    """Delivered goodput over ``interval`` (ns) as a fraction of ``phy_rate``."""
    if interval <= 0:
        raise ValueError("zero-length measurement interval")
    return stats.bits_delivered * SEC / interval / phy_rate


@dataclass(frozen=True)
class DelayStats:
    mean: float
    p95: float
    itu_ok: bool


def delay_stats(stats: FlowStats | list) -> DelayStats | None:
    """Mean and 95th percentile delay in ms; None when nothing was delivered."""
    samples = stats.delay_samples if isinstance(stats, FlowStats) else stats
    if not samples:
        return None
    ms = sorted(s / MS for s in samples)
    mean = math.fsum(ms) / len(ms)
    p95 = ms[min(len(ms) - 1, math.ceil(0.95 * len(ms)) - 1)]
    return DelayStats(mean, p95, mean <= ITU_DELAY_BOUND_MS)


@dataclass(frozen=True)
class Interval:
    mean: float
    half_width: float

    @property
    def lo(self) -> float:
        return self.mean - self.half_width

    @property
    def hi(self) -> float:
        return self.mean + self.half_width

    def overlaps(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


def ci95(samples) -> Interval:
    """Student-t 95% confidence interval of the mean."""
    xs = [float(x) for x in samples]
    n = len(xs)
    if n < 2:
        raise ValueError("need at least two samples")
    mean = math.fsum(xs) / n
    sd = statistics.stdev(xs)
    return Interval(mean, float(_st.t.ppf(0.975, n - 1)) * sd / math.sqrt(n))


def replay_bits(log: list[tuple], flow: str, warmup: int) -> int:
    """Recount delivered payload bits for ``flow`` straight from a delivery log.

    Log rows start with ``(flow, payload_bytes, created_at, delivered_at)``.
    """
    return sum(8 * row[1] for row in log
               if row[0] == flow and row[2] >= warmup and row[3] >= warmup)
