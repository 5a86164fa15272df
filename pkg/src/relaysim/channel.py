"""Single-channel propagation model with hop-based ranges.

Nodes sit on a line at integer hop positions. A transmission can be decoded
within ``comm_range`` hops, is sensed within ``cs_range`` hops and corrupts any
overlapping reception within ``if_range`` hops of its source. There is no
capture effect and no bit error other than collisions.
"""

from __future__ import annotations

from typing import Protocol

from .engine import Simulator


class ChannelError(RuntimeError):
    pass


class Radio(Protocol):
    def on_busy(self) -> None: ...
    def on_idle(self) -> None: ...
    def on_receive(self, tx: "Transmission", ok: bool) -> None: ...


class Transmission:
    __slots__ = ("src", "frame", "start", "end", "rate", "corrupt")

    def __init__(self, src: str, frame, start: int, end: int, rate: int):
        if end <= start:
            raise ChannelError("transmission must have positive duration")
        self.src = src
        self.frame = frame
        self.start = start
        self.end = end
        self.rate = rate
        # nodes at which this transmission cannot be decoded
        self.corrupt: set[str] = set()

    def __repr__(self) -> str:
        return f"Tx({self.src}->{self.frame.dst} {self.frame.kind} {self.start}..{self.end})"


class Channel:
    def __init__(self, sim: Simulator, positions: dict[str, int],
                 comm_range: int = 1, cs_range: int = 1, if_range: int = 2,
                 log: list | None = None):
        if not (comm_range <= if_range and cs_range >= 1):
            raise ValueError("need comm_range <= if_range and cs_range >= 1")
        self.sim = sim
        self.positions = dict(positions)
        self.comm_range = comm_range
        self.cs_range = cs_range
        self.if_range = if_range
        self.radios: dict[str, Radio] = {}
        self.active: list[Transmission] = []
        self.nav: dict[str, int] = {n: 0 for n in positions}
        self._busy: dict[str, int] = {n: 0 for n in positions}
        self._transmitting: dict[str, Transmission] = {}
        names = list(positions)
        self._within = {}
        for rng_name, hops in (("comm", comm_range), ("cs", cs_range), ("if", if_range)):
            for n in names:
                self._within[rng_name, n] = tuple(
                    m for m in names if abs(positions[m] - positions[n]) <= hops)
        self.log = log

    def attach(self, node: str, radio: Radio) -> None:
        self.radios[node] = radio

    def hops(self, a: str, b: str) -> int:
        return abs(self.positions[a] - self.positions[b])

    def transmitting(self, node: str) -> bool:
        return node in self._transmitting

    def begin_transmission(self, src: str, frame, duration: int, rate: int = 0) -> Transmission:
        if src in self._transmitting:
            raise ChannelError(f"{src} is already transmitting")
        now = self.sim.now
        tx = Transmission(src, frame, now, now + duration, rate)
        within = self._within
        for other in self.active:
            other.corrupt.update(within["if", src])
            tx.corrupt.update(within["if", other.src])
        self.active.append(tx)
        self._transmitting[src] = tx
        if self.log is not None:
            sensed_busy = self._sensed_busy_before(src, now)
            self.log.append(("tx", now, src, frame.kind, frame.dst, sensed_busy, tx.end))
        self.sim.at(tx.end, src, "tx_end", self.end_transmission, tx)
        busy = self._busy
        radios = self.radios
        for n in within["cs", src]:
            busy[n] += 1
            if busy[n] == 1 and n in radios:
                radios[n].on_busy()
        return tx

    def _sensed_busy_before(self, node: str, now: int) -> bool:
        # carrier state as seen before any transmission that starts in this same instant
        if self.nav[node] > now:
            return True
        cs = self._within["cs", node]
        return any(t.src in cs and t.start < now for t in self.active)

    def end_transmission(self, tx: Transmission) -> dict[str, bool]:
        """Retire ``tx``; returns per-receiver outcome (True = decoded ok)."""
        self.active.remove(tx)
        del self._transmitting[tx.src]
        outcome = {}
        radios = self.radios
        for n in self._within["comm", tx.src]:
            if n == tx.src:
                continue
            ok = n not in tx.corrupt
            outcome[n] = ok
            if self.log is not None:
                self.log.append(("rx", tx.end, n, tx.frame.kind, tx.src, ok, tx.start))
            if n in radios:
                radios[n].on_receive(tx, ok)
        comm = self._within["comm", tx.src]
        for n in self._within["cs", tx.src]:
            if n not in comm and n in radios:
                # sensed energy that cannot be decoded
                radios[n].on_receive(tx, False)
        busy = self._busy
        for n in self._within["cs", tx.src]:
            busy[n] -= 1
            if busy[n] == 0 and n in radios:
                radios[n].on_idle()
        return outcome

    def physically_busy(self, node: str) -> bool:
        return self._busy[node] > 0

    def carrier_sense(self, node: str) -> str:
        if self._busy[node] > 0 or self.nav[node] > self.sim.now:
            return "busy"
        return "idle"
