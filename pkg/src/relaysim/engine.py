"""Event loop, virtual clock and named random streams.

Time is kept in integer nanoseconds. Events are dispatched in ``(time, seq)``
order, where ``seq`` is a global insertion counter, so ties resolve FIFO.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from typing import Any, Callable

NS = 1
US = 1_000
MS = 1_000_000
SEC = 1_000_000_000


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current clock."""


class Event:
    __slots__ = ("time", "seq", "target", "kind", "callback", "args", "cancelled")

    def __init__(self, time: int, target: str, kind: str,
                 callback: Callable[..., Any] | None = None, args: tuple = ()):
        self.time = time
        self.seq = -1
        self.target = target
        self.kind = kind
        self.callback = callback
        self.args = args
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True

    def __repr__(self) -> str:
        return f"Event(t={self.time}, seq={self.seq}, {self.target}:{self.kind})"


class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    The underlying generator seed is derived with SHA-256, so the draw sequence
    does not depend on the order in which streams are created.
    """

    def __init__(self, seed: int, stream_id: str):
        self.seed = seed
        self.stream_id = stream_id
        digest = hashlib.sha256(f"{seed}/{stream_id}".encode()).digest()
        self._rng = random.Random(int.from_bytes(digest[:8], "big"))

    def uniform_int(self, lo: int, hi: int) -> int:
        if lo > hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self._rng.randrange(hi - lo + 1)

    def random(self) -> float:
        return self._rng.random()


def draw_uniform_int(stream: RngStream, lo: int, hi: int) -> int:
    return stream.uniform_int(lo, hi)


class Simulator:
    """Single-threaded discrete-event core.

    ``trace=True`` folds every dispatched event's ``(time, seq, target, kind)``
    into a SHA-256 digest, exposed as :attr:`trace_digest`. ``record=True``
    keeps the ``(time, seq)`` of every dispatched event in :attr:`order`.
    """

    def __init__(self, seed: int = 0, trace: bool = False, record: bool = False):
        self.seed = seed
        self.now = 0
        self._heap: list[tuple[int, int, Event]] = []
        self._seq = 0
        self._streams: dict[str, RngStream] = {}
        self._trace = hashlib.sha256() if trace else None
        self.dispatched = 0
        self.order: list[tuple[int, int]] | None = [] if record else None

    def schedule(self, event: Event) -> Event:
        if event.time < self.now:
            raise SchedulingError(f"{event!r} is before clock {self.now}")
        event.seq = self._seq
        self._seq += 1
        heapq.heappush(self._heap, (event.time, event.seq, event))
        return event

    def at(self, time: int, target: str, kind: str,
           callback: Callable[..., Any], *args: Any) -> Event:
        return self.schedule(Event(time, target, kind, callback, args))

    def after(self, delay: int, target: str, kind: str,
              callback: Callable[..., Any], *args: Any) -> Event:
        return self.schedule(Event(self.now + delay, target, kind, callback, args))

    def run_until(self, t_end: int) -> int:
        """Dispatch every event with ``time <= t_end``; return how many ran."""
        heap = self._heap
        trace = self._trace
        order = self.order
        count = 0
        while heap and heap[0][0] <= t_end:
            time, seq, ev = heapq.heappop(heap)
            if ev.cancelled:
                continue
            self.now = time
            if order is not None:
                order.append((time, seq))
            if trace is not None:
                trace.update(f"{time}:{seq}:{ev.target}:{ev.kind};".encode())
            if ev.callback is not None:
                ev.callback(*ev.args)
            count += 1
        self.now = max(self.now, t_end)
        self.dispatched += count
        return count

    def pending(self) -> int:
        return sum(1 for _, _, ev in self._heap if not ev.cancelled)

    def rng(self, stream_id: str) -> RngStream:
        stream = self._streams.get(stream_id)
        if stream is None:
            stream = self._streams[stream_id] = RngStream(self.seed, stream_id)
        return stream

    @property
    def trace_digest(self) -> str | None:
        return None if self._trace is None else self._trace.hexdigest()
