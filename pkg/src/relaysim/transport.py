"""Saturated TCP (NewReno-lite) and a constant-bit-rate UDP source.

Sequence numbers are in bytes; the congestion window is in segments.
Connections are pre-established at t=0 and the application is always
backlogged. ACKs are immediate and cumulative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .engine import MS, SEC, Simulator

ACK_BYTES = 40


@dataclass(frozen=True)
class TcpParams:
    mss: int = 1000
    initial_cwnd: float = 1.0
    initial_ssthresh: float = 1e9
    rto_initial_ns: int = 1 * SEC
    rto_min_ns: int = 200 * MS
    rto_max_ns: int = 60 * SEC
    dupack_threshold: int = 3
    max_window: int | None = 20  # segments; None = unbounded receive window


@dataclass(slots=True)
class Segment:
    seq: int
    length: int
    retransmit: bool = False


@dataclass(slots=True)
class TcpAck:
    ack_no: int


class TcpError(RuntimeError):
    pass


class TcpSender:
    """Window-based sender. ``emit(seq, length, retransmit)`` hands a segment down."""

    def __init__(self, sim: Simulator, flow_id: str, emit: Callable[[int, int, bool], None],
                 params: TcpParams = TcpParams()):
        self.sim = sim
        self.flow_id = flow_id
        self.emit = emit
        self.p = params
        self.mss = params.mss
        self.cwnd = float(params.initial_cwnd)
        self.ssthresh = float(params.initial_ssthresh)
        self.snd_una = 0
        self.snd_nxt = 0
        self.snd_max = 0
        self.dup_acks = 0
        self.state = "slow-start"
        self.recover = 0
        self.srtt: float | None = None
        self.rttvar = 0.0
        self.rto = params.rto_initial_ns
        self._timer = None
        self._sent_at: dict[int, int] = {}
        self.retransmits = 0
        self.timeouts = 0

    @property
    def flight(self) -> int:
        """Outstanding segments."""
        return (self.snd_nxt - self.snd_una) // self.mss

    def start(self) -> None:
        self.maybe_send()

    def maybe_send(self) -> list[int]:
        sent = []
        limit = self.cwnd * self.mss
        if self.p.max_window is not None:
            limit = min(limit, self.p.max_window * self.mss)
        while self.snd_nxt - self.snd_una < limit:
            seq = self.snd_nxt
            rexmit = seq < self.snd_max
            self.snd_nxt += self.mss
            if self.snd_nxt > self.snd_max:
                self.snd_max = self.snd_nxt
            self._transmit(seq, rexmit)
            sent.append(seq)
        return sent

    def _transmit(self, seq: int, rexmit: bool) -> None:
        if rexmit:
            self._sent_at.pop(seq, None)
            self.retransmits += 1
        else:
            self._sent_at[seq] = self.sim.now
        if self._timer is None:
            self._arm_timer()
        self.emit(seq, self.mss, rexmit)

    def _arm_timer(self) -> None:
        if self._timer is not None:
            self._timer.cancel()
        self._timer = self.sim.after(self.rto, self.flow_id, "rto", self.on_rto)

    def _stop_timer(self) -> None:
        if self._timer is not None:
            self._timer.cancel()
            self._timer = None

    def _rtt_sample(self, sample: int) -> None:
        if self.srtt is None:
            self.srtt = float(sample)
            self.rttvar = sample / 2
        else:
            self.rttvar = 0.75 * self.rttvar + 0.25 * abs(self.srtt - sample)
            self.srtt = 0.875 * self.srtt + 0.125 * sample
        rto = int(self.srtt + max(1, 4 * self.rttvar))
        self.rto = min(max(rto, self.p.rto_min_ns), self.p.rto_max_ns)

    def on_ack(self, ack_no: int) -> None:
        if ack_no > self.snd_max:
            raise TcpError(f"{self.flow_id}: ACK {ack_no} beyond snd_max {self.snd_max}")
        mss = self.mss
        if ack_no > self.snd_una:
            newly = (ack_no - self.snd_una) // mss
            sent = self._sent_at.pop(ack_no - mss, None)
            if sent is not None:
                self._rtt_sample(self.sim.now - sent)
            for seq in range(self.snd_una, ack_no - mss, mss):
                self._sent_at.pop(seq, None)
            self.snd_una = ack_no
            if self.snd_nxt < ack_no:
                self.snd_nxt = ack_no
            if self.state == "fast-recovery":
                if ack_no >= self.recover:
                    self.cwnd = self.ssthresh
                    self.state = "congestion-avoidance"
                    self.dup_acks = 0
                else:
                    # partial ACK: retransmit the next hole, deflate
                    self._transmit(self.snd_una, True)
                    self.cwnd = max(self.cwnd - newly + 1, 1.0)
            else:
                self.dup_acks = 0
                for _ in range(newly):
                    if self.cwnd < self.ssthresh:
                        self.cwnd += 1
                    else:
                        self.cwnd += 1 / self.cwnd
                self.state = "slow-start" if self.cwnd < self.ssthresh else "congestion-avoidance"
            if self.snd_una < self.snd_max:
                self._arm_timer()
            else:
                self._stop_timer()
        elif ack_no == self.snd_una and self.snd_max > self.snd_una:
            self.dup_acks += 1
            if self.state == "fast-recovery":
                self.cwnd += 1
            elif self.dup_acks == self.p.dupack_threshold and ack_no >= self.recover:
                self.ssthresh = max(self.flight / 2, 2.0)
                self.recover = self.snd_max
                self._transmit(self.snd_una, True)
                self.cwnd = self.ssthresh + self.p.dupack_threshold
                self.state = "fast-recovery"
        self.maybe_send()

    def on_rto(self) -> None:
        self._timer = None
        self.timeouts += 1
        self.ssthresh = max(self.flight / 2, 2.0)
        self.cwnd = 1.0
        self.dup_acks = 0
        self.state = "slow-start"
        self.recover = self.snd_max
        self.rto = min(2 * self.rto, self.p.rto_max_ns)
        self.snd_nxt = self.snd_una
        self._sent_at.clear()
        self.maybe_send()


class TcpReceiver:
    """Cumulative-ACK receiver. ``send_ack(ack_no, dscp)`` emits the reverse-flow ACK.

    ``on_data(seq, length, first)`` reports each arriving segment; ``first`` is
    True the first time a given byte range arrives.
    """

    def __init__(self, send_ack: Callable[[int, int], None], mss: int = 1000):
        self.send_ack = send_ack
        self.mss = mss
        self.rcv_next = 0
        self._ooo: set[int] = set()
        self.delivered_bytes = 0
        self.acks_sent = 0
        self.last_ack = 0

    def receive(self, seq: int, length: int, dscp: int) -> bool:
        first = False
        if seq == self.rcv_next:
            first = True
            self.rcv_next += length
            while self.rcv_next in self._ooo:
                self._ooo.discard(self.rcv_next)
                self.rcv_next += length
        elif seq > self.rcv_next and seq not in self._ooo:
            first = True
            self._ooo.add(seq)
        if first:
            self.delivered_bytes += length
        self.acks_sent += 1
        self.last_ack = self.rcv_next
        self.send_ack(self.rcv_next, dscp)
        return first


class CbrSource:
    """Constant-bit-rate datagram source: one packet every ``size * 8 / rate`` seconds."""

    def __init__(self, sim: Simulator, flow_id: str, rate_bps: int,
                 emit: Callable[[int], None], size: int = 1000):
        if rate_bps <= 0:
            raise ValueError("rate must be positive")
        self.sim = sim
        self.flow_id = flow_id
        self.size = size
        self.interval = size * 8 * SEC // rate_bps
        self.emit = emit
        self.seq = 0

    def start(self) -> None:
        self.sim.after(0, self.flow_id, "cbr", self._tick)

    def _tick(self) -> None:
        self.emit(self.seq)
        self.seq += 1
        self.sim.after(self.interval, self.flow_id, "cbr", self._tick)
