"""EDCA MAC with RTS/CTS, per-AC contention and internal collision resolution.

Countdown semantics: an AC waits until the medium has been idle for
``AIFS = SIFS + aifsn * slot`` and then decrements its backoff counter once per
fully idle slot. It transmits at the slot boundary where the counter reaches
zero, so a counter of ``k`` drawn at idle start ``t0`` fires at
``t0 + AIFS + k * slot``. A busy medium freezes the counter; only whole idle
slots count. Two stations whose counters expire at the same instant both
transmit (the medium change is not visible within the slot).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable

from .channel import Channel, Transmission
from .engine import US, RngStream, Simulator

PRIORITY = {"VO": 3, "VI": 2, "BE": 1, "BK": 0}
QUEUE_CAPACITY = 50


@dataclass(frozen=True)
class AcParams:
    aifsn: int
    cw_min: int
    cw_max: int
    retry_limit: int = 7

    def __post_init__(self):
        if self.aifsn < 1:
            raise ValueError("aifsn must be >= 1")
        if not 0 <= self.cw_min <= self.cw_max:
            raise ValueError("need 0 <= cw_min <= cw_max")
        for cw in (self.cw_min, self.cw_max):
            if (cw + 1) & cw:
                raise ValueError(f"contention window {cw} is not of the form 2^k - 1")
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be >= 0")


# 802.11 EDCA defaults on an 802.11b PHY (aCWmin = 31, aCWmax = 1023).
DEFAULT_EDCA = {
    "VO": AcParams(aifsn=2, cw_min=7, cw_max=15),
    "VI": AcParams(aifsn=2, cw_min=15, cw_max=31),
    "BE": AcParams(aifsn=3, cw_min=31, cw_max=1023),
    "BK": AcParams(aifsn=7, cw_min=31, cw_max=1023),
}


@dataclass(frozen=True)
class PhyParams:
    slot_ns: int = 20 * US
    sifs_ns: int = 10 * US
    plcp_ns: int = 192 * US
    data_rate: int = 11_000_000
    basic_rate: int = 2_000_000
    mac_overhead: int = 28  # MAC header + FCS on DATA frames
    rts_bytes: int = 20
    cts_bytes: int = 14
    ack_bytes: int = 14

    def airtime(self, nbytes: int, rate: int) -> int:
        """PLCP preamble/header plus payload bits, rounded up to whole microseconds."""
        return self.plcp_ns + math.ceil(nbytes * 8 * 1_000_000 / rate) * US

    @property
    def rts_ns(self) -> int:
        return self.airtime(self.rts_bytes, self.basic_rate)

    @property
    def cts_ns(self) -> int:
        return self.airtime(self.cts_bytes, self.basic_rate)

    @property
    def ack_ns(self) -> int:
        return self.airtime(self.ack_bytes, self.basic_rate)

    def data_ns(self, ip_bytes: int) -> int:
        return self.airtime(ip_bytes + self.mac_overhead, self.data_rate)

    def exchange_ns(self, ip_bytes: int) -> int:
        """Airtime of a full RTS/CTS/DATA/ACK exchange including the three SIFS gaps."""
        return self.rts_ns + self.cts_ns + self.data_ns(ip_bytes) + self.ack_ns + 3 * self.sifs_ns


class MacFrame:
    __slots__ = ("kind", "src", "dst", "size", "duration", "payload", "seq")

    def __init__(self, kind: str, src: str, dst: str, size: int, duration: int,
                 payload=None, seq: int = -1):
        if (kind == "DATA") != (payload is not None):
            raise ValueError("DATA frames carry exactly one packet; control frames none")
        self.kind = kind
        self.src = src
        self.dst = dst
        self.size = size
        self.duration = duration
        self.payload = payload
        self.seq = seq

    def __repr__(self) -> str:
        return f"{self.kind}({self.src}->{self.dst})"


class AcQueue:
    """One access-category transmit queue with its contention state."""

    def __init__(self, label: str, params: AcParams, rng: RngStream,
                 capacity: int = QUEUE_CAPACITY, check: bool = False):
        self.label = label
        self.priority = PRIORITY[label]
        self.params = params
        self.capacity = capacity
        self.fifo: deque = deque()
        self.cw = params.cw_min
        self.backoff = 0
        self.retries = 0
        self.rng = rng
        self.drops = 0
        self.discards = 0
        self.check = check
        self.max_len = 0
        self.head_seq: int | None = None

    def enqueue(self, packet, next_hop: str) -> bool:
        if len(self.fifo) >= self.capacity:
            self.drops += 1
            return False
        self.fifo.append((packet, next_hop))
        if len(self.fifo) > self.max_len:
            self.max_len = len(self.fifo)
        return True

    def draw_backoff(self) -> int:
        self.backoff = self.rng.uniform_int(0, self.cw)
        return self.backoff

    def on_failure(self) -> bool:
        """Binary exponential backoff; True if the head packet was discarded."""
        p = self.params
        self.retries += 1
        self.cw = min(2 * (self.cw + 1) - 1, p.cw_max)
        discarded = False
        if self.retries > p.retry_limit:
            self.fifo.popleft()
            self.head_seq = None
            self.discards += 1
            self.cw = p.cw_min
            self.retries = 0
            discarded = True
        if self.check:
            assert p.cw_min <= self.cw <= p.cw_max
        self.draw_backoff()
        return discarded

    def on_success(self) -> None:
        self.fifo.popleft()
        self.head_seq = None
        self.cw = self.params.cw_min
        self.retries = 0
        self.draw_backoff()  # post-backoff


def resolve_internal_collision(ready: list[AcQueue],
                               on_discard: Callable | None = None) -> AcQueue:
    """Highest-priority label wins; every loser backs off as after a collision."""
    winner = max(ready, key=lambda q: q.priority)
    for q in ready:
        if q is not winner:
            head = q.fifo[0][0]
            if q.on_failure() and on_discard is not None:
                on_discard(head, "retry-limit")
    return winner


class _Exchange:
    __slots__ = ("queue", "packet", "next_hop", "seq", "stage", "timer")

    def __init__(self, queue, packet, next_hop, seq):
        self.queue = queue
        self.packet = packet
        self.next_hop = next_hop
        self.seq = seq
        self.stage = "rts"
        self.timer = None


class EdcaStation:
    """EDCA MAC entity of one node.

    ``deliver(packet, src)`` is called once per distinct DATA frame received.
    ``ack_filter(packet, src)`` may return False to withhold the MAC ACK.
    ``on_drop(packet, cause)`` reports queue overflow and retry-limit discards,
    ``on_sent(packet)`` reports MAC-acknowledged deliveries.
    """

    def __init__(self, sim: Simulator, channel: Channel, name: str, phy: PhyParams,
                 queue_params: dict[str, AcParams], rng: RngStream,
                 deliver: Callable | None = None, ack_filter: Callable | None = None,
                 on_drop: Callable | None = None, on_sent: Callable | None = None,
                 check: bool = False, eifs: bool = False):
        self.sim = sim
        self.channel = channel
        self.name = name
        self.phy = phy
        self.rng = rng
        self.check = check
        self.queues = {label: AcQueue(label, params, rng, check=check)
                       for label, params in queue_params.items()}
        self._qlist = sorted(self.queues.values(), key=lambda q: -q.priority)
        self._aifs = {q.label: phy.sifs_ns + q.params.aifsn * phy.slot_ns for q in self._qlist}
        self.deliver = deliver
        self.ack_filter = ack_filter
        self.on_drop = on_drop
        self.on_sent = on_sent
        self._idle_ref: int | None = 0
        # EIFS replaces AIFS after a reception that could not be decoded
        self.use_eifs = eifs
        self._eifs_extra = phy.sifs_ns + phy.ack_ns
        self._after_error = False
        self._access_ev = None
        self._nav_ev = None
        self._exchange: _Exchange | None = None
        self._mac_seq = 0
        self._last_seq: dict[str, int] = {}
        self.stats = {"rts": 0, "success": 0, "cts_timeout": 0, "ack_timeout": 0,
                      "internal_collisions": 0, "acks_withheld": 0, "dup_rx": 0}
        self.mac_acked: dict[str, int] = {}
        channel.attach(name, self)
        for q in self._qlist:
            q.draw_backoff()

    # -- upper interface ----------------------------------------------------

    def enqueue(self, packet, ac: str, next_hop: str) -> bool:
        q = self.queues[ac]
        was_empty = not q.fifo
        if not q.enqueue(packet, next_hop):
            if self.on_drop is not None:
                self.on_drop(packet, "mac-queue")
            return False
        if was_empty and self._exchange is None:
            if self._idle_ref is None:
                if q.backoff == 0:
                    q.draw_backoff()
            else:
                self._schedule_access()
        return True

    def queue_length(self, ac: str) -> int:
        return len(self.queues[ac].fifo)

    # -- contention ---------------------------------------------------------

    def _target(self, q: AcQueue) -> int:
        return self._idle_ref + self._aifs[q.label] + q.backoff * self.phy.slot_ns

    def _schedule_access(self) -> None:
        if self._access_ev is not None:
            self._access_ev.cancel()
            self._access_ev = None
        best = None
        for q in self._qlist:
            if q.fifo:
                t = self._target(q)
                if best is None or t < best:
                    best = t
        if best is not None:
            now = self.sim.now
            self._access_ev = self.sim.at(best if best > now else now, self.name,
                                          "access", self._access)

    def _freeze(self, now: int) -> None:
        ref = self._idle_ref
        if ref is None:
            return
        slot = self.phy.slot_ns
        for q in self._qlist:
            if q.backoff:
                start = ref + self._aifs[q.label]
                if now > start:
                    q.backoff = max(0, q.backoff - (now - start) // slot)
        self._idle_ref = None

    def on_busy(self) -> None:
        ev = self._access_ev
        if ev is not None and ev.time == self.sim.now:
            # expiry in this same slot: the transmission still goes out
            return
        if ev is not None:
            ev.cancel()
            self._access_ev = None
        self._freeze(self.sim.now)

    def on_idle(self) -> None:
        if self._exchange is not None:
            return
        self._resume()

    def _resume(self) -> None:
        now = self.sim.now
        if self.channel.physically_busy(self.name):
            return
        nav = self.channel.nav[self.name]
        if nav > now:
            if self._nav_ev is None or self._nav_ev.time != nav:
                if self._nav_ev is not None:
                    self._nav_ev.cancel()
                self._nav_ev = self.sim.at(nav, self.name, "nav_end", self._nav_end)
            return
        if self._idle_ref is None:
            self._idle_ref = now + self._eifs_extra if self._after_error else now
        self._schedule_access()

    def _nav_end(self) -> None:
        self._nav_ev = None
        if self._exchange is None:
            self._resume()

    def _access(self) -> None:
        self._access_ev = None
        now = self.sim.now
        ready = [q for q in self._qlist if q.fifo and self._target(q) <= now]
        self._freeze(now)
        if not ready:
            self._resume_later()
            return
        if len(ready) > 1:
            self.stats["internal_collisions"] += len(ready) - 1
            winner = resolve_internal_collision(ready, self.on_drop)
        else:
            winner = ready[0]
        packet, next_hop = winner.fifo[0]
        if winner.head_seq is None:
            self._mac_seq += 1
            winner.head_seq = self._mac_seq
        self._exchange = _Exchange(winner, packet, next_hop, winner.head_seq)
        self._send_rts()

    def _resume_later(self) -> None:
        if not self.channel.physically_busy(self.name) and self.channel.nav[self.name] <= self.sim.now:
            self._idle_ref = self.sim.now
            self._schedule_access()

    # -- frame exchange -----------------------------------------------------

    def _send_rts(self) -> None:
        ex = self._exchange
        phy = self.phy
        data_ns = phy.data_ns(ex.packet.size)
        dur = 3 * phy.sifs_ns + phy.cts_ns + data_ns + phy.ack_ns
        frame = MacFrame("RTS", self.name, ex.next_hop, phy.rts_bytes, dur, seq=ex.seq)
        ex.stage = "wait_cts"
        self.stats["rts"] += 1
        self.channel.begin_transmission(self.name, frame, phy.rts_ns, phy.basic_rate)
        timeout = self.sim.now + phy.rts_ns + phy.sifs_ns + phy.cts_ns + phy.slot_ns
        ex.timer = self.sim.at(timeout, self.name, "cts_timeout", self._timeout, "cts_timeout")

    def _send_data(self) -> None:
        ex = self._exchange
        if ex is None or ex.stage != "got_cts":
            return
        phy = self.phy
        data_ns = phy.data_ns(ex.packet.size)
        frame = MacFrame("DATA", self.name, ex.next_hop, ex.packet.size + phy.mac_overhead,
                         phy.sifs_ns + phy.ack_ns, payload=ex.packet, seq=ex.seq)
        ex.stage = "wait_ack"
        self.channel.begin_transmission(self.name, frame, data_ns, phy.data_rate)
        timeout = self.sim.now + data_ns + phy.sifs_ns + phy.ack_ns + phy.slot_ns
        ex.timer = self.sim.at(timeout, self.name, "ack_timeout", self._timeout, "ack_timeout")

    def _timeout(self, kind: str) -> None:
        ex = self._exchange
        self.stats[kind] += 1
        self._exchange = None
        if ex.queue.on_failure():
            if self.on_drop is not None:
                self.on_drop(ex.packet, "retry-limit")
        self._resume()

    def _respond(self, frame: MacFrame, ns: int, rate: int) -> None:
        if self.channel.transmitting(self.name):
            return
        self.channel.begin_transmission(self.name, frame, ns, rate)

    def on_receive(self, tx: Transmission, ok: bool) -> None:
        if not ok:
            if self.use_eifs:
                self._after_error = True
            return
        self._after_error = False
        frame = tx.frame
        now = self.sim.now
        phy = self.phy
        if frame.dst != self.name:
            nav = self.channel.nav
            until = now + frame.duration
            if until > nav[self.name]:
                nav[self.name] = until
            return
        kind = frame.kind
        if kind == "RTS":
            if self._exchange is None and self.channel.nav[self.name] <= now:
                cts = MacFrame("CTS", self.name, frame.src, phy.cts_bytes,
                               frame.duration - phy.sifs_ns - phy.cts_ns)
                self.sim.after(phy.sifs_ns, self.name, "send_cts", self._respond,
                               cts, phy.cts_ns, phy.basic_rate)
        elif kind == "CTS":
            ex = self._exchange
            if ex is not None and ex.stage == "wait_cts" and frame.src == ex.next_hop:
                ex.timer.cancel()
                ex.stage = "got_cts"
                self.sim.after(phy.sifs_ns, self.name, "send_data", self._send_data)
        elif kind == "DATA":
            packet = frame.payload
            send_ack = True
            if self.ack_filter is not None and not self.ack_filter(packet, frame.src):
                send_ack = False
                self.stats["acks_withheld"] += 1
            if send_ack:
                ack = MacFrame("ACK", self.name, frame.src, phy.ack_bytes, 0)
                self.sim.after(phy.sifs_ns, self.name, "send_ack", self._respond,
                               ack, phy.ack_ns, phy.basic_rate)
            if self._last_seq.get(frame.src) == frame.seq:
                self.stats["dup_rx"] += 1
                return
            self._last_seq[frame.src] = frame.seq
            if self.deliver is not None:
                self.deliver(packet, frame.src)
        elif kind == "ACK":
            ex = self._exchange
            if ex is not None and ex.stage == "wait_ack" and frame.src == ex.next_hop:
                ex.timer.cancel()
                self._exchange = None
                ex.queue.on_success()
                self.stats["success"] += 1
                flow = ex.packet.flow_id
                self.mac_acked[flow] = self.mac_acked.get(flow, 0) + 1
                if self.on_sent is not None:
                    self.on_sent(ex.packet)
                # on_idle from the channel follows and restarts contention
