"""Selfish relay policy: which AC queue carries each flow at A, how that queue is
configured, and whether the DSCP designation is rewritten."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .netstack import AC_DSCP, A


class AttackStrategy(str, Enum):
    NONE = "None"
    BOA_UP = "BoaUp"
    BOA_DOWN = "BoaDown"
    TWO_BOA = "TwoBoa"
    TRA_UP = "TraUp"
    TRA_DOWN = "TraDown"
    TWO_TRA = "TwoTra"

    @classmethod
    def parse(cls, name: str) -> "AttackStrategy":
        key = name.strip().replace("-", "").replace("_", "").lower()
        aliases = {"honest": "none", "2xboa": "twoboa", "2xtra": "twotra"}
        key = aliases.get(key, key)
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown attack strategy {name!r}")

    @property
    def is_tra(self) -> bool:
        return self in (AttackStrategy.TRA_UP, AttackStrategy.TRA_DOWN, AttackStrategy.TWO_TRA)

    @property
    def is_boa(self) -> bool:
        return self in (AttackStrategy.BOA_UP, AttackStrategy.BOA_DOWN, AttackStrategy.TWO_BOA)


@dataclass(frozen=True)
class PacketDisposition:
    queue_used: str
    queue_params: str
    dscp_out: int


def _d(queue: str, params: str, designation: str) -> PacketDisposition:
    return PacketDisposition(queue, params, AC_DSCP[designation])


S = AttackStrategy
# (strategy, role) -> disposition. Transit traffic is intrinsically VO, source
# traffic intrinsically BE.
DISPOSITIONS: dict[tuple[AttackStrategy, str], PacketDisposition] = {
    (S.NONE, "transit"): _d("VO", "VO", "VO"),
    (S.NONE, "source"): _d("BE", "BE", "BE"),
    (S.BOA_UP, "transit"): _d("VO", "VO", "VO"),
    (S.BOA_UP, "source"): _d("BE", "VO", "BE"),
    (S.BOA_DOWN, "transit"): _d("VO", "BE", "VO"),
    (S.BOA_DOWN, "source"): _d("BE", "BE", "BE"),
    (S.TWO_BOA, "transit"): _d("VO", "BE", "VO"),
    (S.TWO_BOA, "source"): _d("BE", "VO", "BE"),
    (S.TRA_UP, "transit"): _d("VO", "VO", "VO"),
    (S.TRA_UP, "source"): _d("VO", "VO", "VO"),
    (S.TRA_DOWN, "transit"): _d("BE", "BE", "BE"),
    (S.TRA_DOWN, "source"): _d("BE", "BE", "BE"),
    (S.TWO_TRA, "transit"): _d("BE", "BE", "BE"),
    (S.TWO_TRA, "source"): _d("VO", "VO", "VO"),
}
del S


class AttackError(RuntimeError):
    pass


def dispose(strategy: AttackStrategy, role: str, packet=None, node: str = A) -> PacketDisposition:
    """Disposition of a packet handled by the relay. Only A applies a strategy."""
    if node != A:
        raise AttackError(f"attack policy consulted at {node}")
    try:
        return DISPOSITIONS[AttackStrategy(strategy), role]
    except KeyError:
        raise AttackError(f"no disposition for role {role!r}") from None


def source_mark(strategy: AttackStrategy, packet=None) -> int:
    """DSCP the relay stamps on traffic it originates."""
    return DISPOSITIONS[AttackStrategy(strategy), "source"].dscp_out


def queue_configuration(strategy: AttackStrategy) -> dict[str, str]:
    """Map each AC queue instantiated at A to the AC whose EDCA parameters configure it."""
    config: dict[str, str] = {"VO": "VO", "BE": "BE"}
    for role in ("transit", "source"):
        d = dispose(strategy, role)
        config[d.queue_used] = d.queue_params
    return config
