"""Run configuration: dataclasses, validation and JSON round-tripping.

Times in configuration files and on the command line are in seconds; the
simulator works in integer nanoseconds.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .attack import AttackStrategy
from .defense import PunishmentPolicy
from .engine import SEC
from .mac import DEFAULT_EDCA, AcParams, PhyParams
from .netstack import DSCP_TO_AC
from .transport import TcpParams


class ConfigError(ValueError):
    pass


def seconds(x: float) -> int:
    return int(round(x * SEC))


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "uplink"
    transit_direction: str | None = None
    attack: AttackStrategy = AttackStrategy.NONE
    defense: str = "Off"
    alpha: float = 1.0
    active_from: int | None = None      # default: end of warm-up
    measure_window: int = 5 * SEC
    ackdrop_deterministic: bool = False
    duration: int = 90 * SEC
    warmup: int = 15 * SEC
    seeds: tuple[int, ...] = tuple(range(1, 21))
    packet_size: int = 1000
    queue_capacity: int = 50
    source_transport: str = "tcp"       # "tcp" or "cbr" for the relay's own flow
    cbr_rate: int = 11_000_000
    comm_range: int = 1
    cs_range: int = 2
    if_range: int = 2
    eifs: bool = True
    phy: PhyParams = field(default_factory=PhyParams)
    edca: dict = field(default_factory=lambda: dict(DEFAULT_EDCA))
    tcp: TcpParams = field(default_factory=TcpParams)
    dscp_map: dict = field(default_factory=lambda: dict(DSCP_TO_AC))

    def __post_init__(self):
        object.__setattr__(self, "attack", _parse_attack(self.attack))
        if self.scenario not in ("uplink", "downlink"):
            raise ConfigError(f"scenario must be uplink or downlink, not {self.scenario!r}")
        if self.transit_direction is None:
            object.__setattr__(self, "transit_direction",
                               "up" if self.scenario == "uplink" else "down")
        if self.transit_direction not in ("up", "down"):
            raise ConfigError("transit_direction must be up or down")
        if self.defense not in ("Off", "AckDrop", "Shape"):
            raise ConfigError(f"unknown defense {self.defense!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must lie in [0, 1]")
        if not 0 <= self.warmup < self.duration:
            raise ConfigError("need 0 <= warmup < duration")
        if self.measure_window <= 0:
            raise ConfigError("measure_window must be positive")
        if self.defense == "Shape" and self.punish_from < self.measure_window:
            raise ConfigError("shaping needs active_from >= measure_window")
        if self.source_transport not in ("tcp", "cbr"):
            raise ConfigError("source_transport must be tcp or cbr")
        if self.source_transport == "cbr" and self.scenario != "uplink":
            raise ConfigError("the CBR source is only defined for the uplink scenario")
        if self.cbr_rate <= 0 or self.packet_size <= 0 or self.queue_capacity <= 0:
            raise ConfigError("rates, sizes and capacities must be positive")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        for ac, p in self.edca.items():
            if ac not in ("VO", "VI", "BE", "BK") or not isinstance(p, AcParams):
                raise ConfigError(f"bad EDCA entry {ac!r}")

    @property
    def punish_from(self) -> int:
        return self.warmup if self.active_from is None else self.active_from

    @property
    def measured_interval(self) -> int:
        return self.duration - self.warmup

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, AttackStrategy):
                v = v.value
            elif f.name in ("duration", "warmup", "measure_window", "active_from"):
                v = None if v is None else v / SEC
            elif f.name == "phy":
                v = dataclasses.asdict(v)
            elif f.name == "tcp":
                v = dataclasses.asdict(v)
            elif f.name == "edca":
                v = {ac: dataclasses.asdict(p) for ac, p in sorted(v.items())}
            elif f.name == "dscp_map":
                v = {str(k): ac for k, ac in sorted(v.items())}
            elif f.name == "seeds":
                v = list(v)
            d[f.name] = v
        return d

    def fingerprint(self) -> str:
        d = self.to_dict()
        d.pop("seeds")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def policy(self, target_flows: tuple[str, ...]) -> PunishmentPolicy:
        return PunishmentPolicy(kind=self.defense, alpha=self.alpha, target_flows=target_flows,
                                active_from=self.punish_from, window=self.measure_window,
                                deterministic=self.ackdrop_deterministic,
                                bucket_packets=self.queue_capacity)


def _parse_attack(v) -> AttackStrategy:
    if isinstance(v, AttackStrategy):
        return v
    try:
        return AttackStrategy.parse(str(v))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


_TIME_KEYS = ("duration", "warmup", "measure_window", "active_from")


def from_dict(d: dict, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Build a config from plain values (times in seconds); unknown keys are errors."""
    base = base or ScenarioConfig()
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    changes = {}
    for key, value in d.items():
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
        if key in _TIME_KEYS:
            value = None if value is None else seconds(float(value))
        elif key == "phy":
            value = dataclasses.replace(base.phy, **value)
        elif key == "tcp":
            value = dataclasses.replace(base.tcp, **value)
        elif key == "edca":
            merged = dict(base.edca)
            for ac, params in value.items():
                merged[ac] = AcParams(**params) if isinstance(params, dict) else params
            value = merged
        elif key == "dscp_map":
            value = {int(k): ac for k, ac in value.items()}
        elif key == "seeds":
            value = tuple(int(s) for s in value)
        changes[key] = value
    if "scenario" in changes and "transit_direction" not in changes:
        changes["transit_direction"] = None   # re-derive the scenario's default
    try:
        return dataclasses.replace(base, **changes)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load(path: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return from_dict(data, base)


def dump(config: ScenarioConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True)
