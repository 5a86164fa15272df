"""Packets, flows, DSCP classification and static routing on the B - A - AP line."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

B, A, AP = "B", "A", "AP"
NODES = (B, A, AP)
POSITIONS = {B: 0, A: 1, AP: 2}

DSCP_EF = 46
DSCP_DEFAULT = 0
DSCP_CS1 = 8

AC_LABELS = ("VO", "VI", "BE", "BK")
# Intrinsic DSCP used when traffic of a given class is originated.
AC_DSCP = {"VO": DSCP_EF, "VI": 34, "BE": DSCP_DEFAULT, "BK": DSCP_CS1}


def _default_dscp_map() -> dict[int, str]:
    table = {DSCP_EF: "VO", DSCP_DEFAULT: "BE", DSCP_CS1: "BK"}
    for code in range(32, 40):
        table[code] = "VI"
    return table


DSCP_TO_AC = _default_dscp_map()


def classify(dscp: int, table: dict[int, str] | None = None) -> str:
    """Map a DSCP code to an access category; unknown codes fall back to BE."""
    return (DSCP_TO_AC if table is None else table).get(dscp, "BE")


class RoutingError(RuntimeError):
    pass


@dataclass(slots=True)
class IpPacket:
    flow_id: str
    dscp: int
    size: int
    seq: int
    created_at: int
    src: str
    dst: str
    payload: Any = None
    hops: list = field(default_factory=list)

    def __post_init__(self):
        if self.size <= 0:
            raise ValueError("packet size must be positive")


@dataclass(frozen=True)
class FlowSpec:
    id: str
    src: str
    dst: str
    role: str           # "source" or "transit", relative to the relay A
    intrinsic_ac: str
    transport: str      # "tcp-data", "tcp-ack" or "cbr"
    reverse: str | None = None

    @property
    def path(self) -> tuple[str, ...]:
        lo, hi = POSITIONS[self.src], POSITIONS[self.dst]
        step = 1 if hi > lo else -1
        return tuple(NODES[i] for i in range(lo, hi + step, step))


def route(node: str, packet: IpPacket, path: tuple[str, ...] | None = None) -> str:
    """Next hop for ``packet`` at ``node`` along the static line path."""
    if path is None:
        lo, hi = POSITIONS[packet.src], POSITIONS[packet.dst]
        step = 1 if hi > lo else -1
        path = tuple(NODES[i] for i in range(lo, hi + step, step))
    if node == packet.dst or node not in path:
        raise RoutingError(f"{packet.flow_id} packet at unexpected node {node}")
    return path[path.index(node) + 1]
