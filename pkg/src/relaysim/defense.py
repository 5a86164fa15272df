"""AP-side punishment of a selfish relay: MAC-ACK withholding and rate shaping."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable

from .engine import SEC, RngStream, Simulator


@dataclass(frozen=True)
class PunishmentPolicy:
    kind: str = "Off"            # "Off", "AckDrop" or "Shape"
    alpha: float = 1.0
    target_flows: tuple[str, ...] = ("S",)
    active_from: int = 15 * SEC
    window: int = 5 * SEC        # rate measurement window (Shape only)
    deterministic: bool = False  # AckDrop: 1-in-k pattern instead of Bernoulli
    bucket_packets: int = 50

    def __post_init__(self):
        if self.kind not in ("Off", "AckDrop", "Shape"):
            raise ValueError(f"unknown defense kind {self.kind!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.window <= 0:
            raise ValueError("measurement window must be positive")


class AckDropper:
    """Acknowledge an ``alpha`` portion of the target flow's frames."""

    def __init__(self, policy: PunishmentPolicy, rng: RngStream):
        self.policy = policy
        self.rng = rng
        self._credit = 0.0
        self.decisions = 0
        self.acked = 0
        self.withheld: dict[str, int] = {}

    def ack_decision(self, flow_id: str, now: int) -> bool:
        p = self.policy
        if p.kind != "AckDrop" or flow_id not in p.target_flows or now < p.active_from:
            return True
        self.decisions += 1
        if p.deterministic:
            self._credit += p.alpha
            send = self._credit >= 1.0 - 1e-12
            if send:
                self._credit -= 1.0
        else:
            # one draw per frame keeps the stream aligned whatever alpha is
            send = self.rng.random() < p.alpha
        self.acked += send
        if not send:
            self.withheld[flow_id] = self.withheld.get(flow_id, 0) + 1
        return send


def ack_decision(policy: PunishmentPolicy, flow_id: str, now: int, rng: RngStream) -> bool:
    return AckDropper(policy, rng).ack_decision(flow_id, now)


class RateMeter:
    """Counts bits of one flow over ``[start, start + window)``."""

    def __init__(self, flow_id: str, start: int, window: int):
        if window <= 0:
            raise ValueError("window of zero length")
        self.flow_id = flow_id
        self.start = start
        self.window = window
        self.bits_seen = 0

    def observe(self, bits: int, now: int) -> None:
        if self.start <= now < self.start + self.window:
            self.bits_seen += bits

    @property
    def value(self) -> float:
        return self.bits_seen * SEC / self.window


def measure_attack_rate(bits_seen: int, window: int) -> float:
    if window <= 0:
        raise ValueError("window of zero length")
    return bits_seen * SEC / window


class LeakyBucket:
    """Leaky bucket with a bounded packet queue draining at ``rate`` bit/s.

    ``shape`` returns ``("forward", now)``, ``("delay", t)`` or ``("drop", None)``;
    forwarded and delayed packets are handed to ``out`` at their departure time.
    """

    def __init__(self, sim: Simulator, rate_bps: float, out: Callable,
                 capacity: int = 50, name: str = "shaper"):
        self.sim = sim
        self.rate = float(rate_bps)
        self.out = out
        self.capacity = capacity
        self.name = name
        self.queue: deque = deque()
        self.level = 0  # bytes waiting
        self._next_free = 0
        self.forwarded = 0
        self.dropped = 0
        self.bits_out = 0
        self.departures: list[tuple[int, int]] = []

    @property
    def depth(self) -> int:
        return self.capacity

    def _service_ns(self, size: int) -> int:
        return int(round(size * 8 * SEC / self.rate))

    def shape(self, packet) -> tuple[str, int | None]:
        now = self.sim.now
        if self.rate <= 0:
            self.dropped += 1
            return "drop", None
        if not self.queue and now >= self._next_free:
            self._next_free = now + self._service_ns(packet.size)
            self._emit(packet)
            return "forward", now
        if len(self.queue) >= self.capacity:
            self.dropped += 1
            return "drop", None
        depart = self._next_free
        self._next_free = depart + self._service_ns(packet.size)
        self.queue.append(packet)
        self.level += packet.size
        self.sim.at(depart, self.name, "drain", self._drain)
        return "delay", depart

    def _drain(self) -> None:
        packet = self.queue.popleft()
        self.level -= packet.size
        self._emit(packet)

    def _emit(self, packet) -> None:
        self.forwarded += 1
        self.bits_out += packet.size * 8
        self.departures.append((self.sim.now, packet.size * 8))
        self.out(packet)


class Shaper:
    """Measures the target flow, then shapes it to ``alpha`` times that rate.

    Until the bucket is installed packets pass straight through.
    """

    def __init__(self, sim: Simulator, policy: PunishmentPolicy, out: Callable,
                 measure_start: int):
        self.sim = sim
        self.policy = policy
        self.out = out
        self.meter = RateMeter(policy.target_flows[0], measure_start, policy.window)
        self.bucket: LeakyBucket | None = None
        self.install_at = measure_start + policy.window
        self.delayed = 0
        self.flows_seen: set[str] = set()
        sim.at(self.install_at, "AP", "shaper_install", self._install)

    def _install(self) -> None:
        rate = self.policy.alpha * self.meter.value
        self.bucket = LeakyBucket(self.sim, rate, self.out,
                                  capacity=self.policy.bucket_packets, name="AP.shaper")

    @property
    def rate(self) -> float | None:
        return None if self.bucket is None else self.bucket.rate

    def handle(self, packet) -> str:
        now = self.sim.now
        self.flows_seen.add(packet.flow_id)
        if self.bucket is None:
            self.meter.observe(packet.size * 8, now)
            self.out(packet)
            return "forward"
        verdict, _ = self.bucket.shape(packet)
        if verdict == "delay":
            self.delayed += 1
        return verdict
