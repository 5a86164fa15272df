"""Builds the B - A - AP network for one configuration and runs it."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import attack as atk
from .channel import Channel
from .config import ScenarioConfig
from .defense import AckDropper, Shaper
from .engine import Simulator
from .mac import EdcaStation
from .metrics import FlowStats, delay_stats, throughput
from .netstack import A, AC_DSCP, AP, B, NODES, POSITIONS, FlowSpec, IpPacket, classify, route
from .transport import ACK_BYTES, CbrSource, TcpReceiver, TcpSender


def flow_specs(config: ScenarioConfig) -> dict[str, FlowSpec]:
    """The four flows of a scenario, keyed by id (S, S', T, T')."""
    if config.scenario == "uplink":
        s_data = FlowSpec("S", A, AP, "source", "BE",
                          "cbr" if config.source_transport == "cbr" else "tcp-data", "S'")
        s_ack = FlowSpec("S'", AP, A, "source", "BE", "tcp-ack", "S")
    else:
        s_data = FlowSpec("S'", AP, A, "source", "BE", "tcp-data", "S")
        s_ack = FlowSpec("S", A, AP, "source", "BE", "tcp-ack", "S'")
    if config.transit_direction == "up":
        t_data = FlowSpec("T", B, AP, "transit", "VO", "tcp-data", "T'")
        t_ack = FlowSpec("T'", AP, B, "transit", "VO", "tcp-ack", "T")
    else:
        t_data = FlowSpec("T", AP, B, "transit", "VO", "tcp-data", "T'")
        t_ack = FlowSpec("T'", B, AP, "transit", "VO", "tcp-ack", "T")
    flows = {f.id: f for f in (s_data, s_ack, t_data, t_ack)}
    if s_data.transport == "cbr":
        del flows["S'"]
    return flows


def attacker_flow(config: ScenarioConfig) -> str:
    """Id of the relay's own data flow: S uplink, S' downlink."""
    return "S" if config.scenario == "uplink" else "S'"


@dataclass
class FlowResult:
    flow: str
    normalized_throughput: float
    mean_delay_ms: float | None
    p95_delay_ms: float | None
    packets: int
    drops: dict


@dataclass
class RunSummary:
    seed: int
    fingerprint: str
    scenario: str
    attack: str
    defense: str
    alpha: float
    flows: dict[str, FlowResult]
    extra: dict = field(default_factory=dict)

    def thr(self, flow: str) -> float:
        return self.flows[flow].normalized_throughput

    def delay(self, flow: str) -> float | None:
        return self.flows[flow].mean_delay_ms


class Network:
    """One simulation run: nodes, flows, transport endpoints and defense."""

    def __init__(self, config: ScenarioConfig, seed: int, *, check: bool = False,
                 log_events: bool = False, trace: bool = False):
        self.config = config
        self.seed = seed
        self.sim = Simulator(seed, trace=trace, record=check)
        self.check = check
        self.channel_log: list | None = [] if log_events else None
        self.delivery_log: list | None = [] if log_events else None
        self.packet_log: list | None = [] if log_events else None
        self.channel = Channel(self.sim, POSITIONS, config.comm_range, config.cs_range,
                               config.if_range, log=self.channel_log)
        self.flows = flow_specs(config)
        self.strategy = config.attack
        self.stats = {fid: FlowStats(fid, config.warmup) for fid in self.flows}
        self.attack_flow = attacker_flow(config)

        target = (self.attack_flow,) if config.scenario == "uplink" else ("S", "S'")
        self.policy = config.policy(target)
        self.ack_dropper = None
        self.shaper = None
        if self.policy.kind == "AckDrop":
            self.ack_dropper = AckDropper(self.policy, self.sim.rng("defense.ackdrop"))
        elif self.policy.kind == "Shape":
            start = self.policy.active_from - self.policy.window
            if config.scenario == "uplink":
                self.shaper = Shaper(self.sim, self.policy, self._deliver_local, start)
            else:
                self.shaper = Shaper(self.sim, self.policy, self._enqueue_from_ap, start)

        self.macs: dict[str, EdcaStation] = {}
        a_conf = atk.queue_configuration(self.strategy)
        for name in NODES:
            if name == A:
                params = {q: config.edca[cfg] for q, cfg in a_conf.items()}
            else:
                params = {"VO": config.edca["VO"], "BE": config.edca["BE"]}
            mac = EdcaStation(
                self.sim, self.channel, name, config.phy, params,
                self.sim.rng(f"mac.{name}.backoff"),
                deliver=lambda pkt, src, n=name: self._mac_deliver(n, src, pkt),
                ack_filter=self._ack_filter if name == AP and self.ack_dropper else None,
                on_drop=lambda pkt, cause: self._drop(pkt, cause),
                check=check, eifs=config.eifs)
            for q in mac.queues.values():
                q.capacity = config.queue_capacity
            self.macs[name] = mac

        self.senders: dict[str, TcpSender] = {}
        self.receivers: dict[str, TcpReceiver] = {}
        self.cbr: CbrSource | None = None
        self._pkt_seq = 0
        self.rx_count: dict[tuple[str, str, str], int] = {}   # (src, dst, flow) -> frames
        for f in self.flows.values():
            if f.transport == "tcp-data":
                self.senders[f.id] = TcpSender(
                    self.sim, f.id, lambda seq, ln, rx, f=f: self._emit_data(f, seq, ln),
                    config.tcp)
                self.receivers[f.id] = TcpReceiver(
                    lambda ack_no, dscp, f=f: self._emit_ack(f, ack_no, dscp), config.tcp.mss)
            elif f.transport == "cbr":
                self.cbr = CbrSource(self.sim, f.id, config.cbr_rate,
                                     lambda seq, f=f: self._emit_data(f, seq, config.packet_size),
                                     config.packet_size)

    # -- packet origination -------------------------------------------------

    def _new_packet(self, f: FlowSpec, dscp: int, size: int, payload) -> IpPacket:
        self._pkt_seq += 1
        return IpPacket(f.id, dscp, size, self._pkt_seq, self.sim.now, f.src, f.dst, payload)

    def _emit_data(self, f: FlowSpec, seq: int, length: int) -> None:
        dscp = AC_DSCP[f.intrinsic_ac]
        size = self.config.packet_size
        pkt = self._new_packet(f, dscp, size, ("data", seq, length))
        if self.shaper is not None and f.id == self.attack_flow and f.src == AP:
            self._shape(pkt)
            return
        self._originate(f, pkt)

    def _emit_ack(self, data_flow: FlowSpec, ack_no: int, dscp: int) -> None:
        f = self.flows[data_flow.reverse]
        pkt = self._new_packet(f, dscp, ACK_BYTES, ("ack", ack_no))
        self._originate(f, pkt)

    def _originate(self, f: FlowSpec, pkt: IpPacket) -> None:
        node = f.src
        if node == A:
            pkt.dscp = atk.source_mark(self.strategy, pkt)
            d = atk.dispose(self.strategy, "source", pkt)
            pkt.dscp = d.dscp_out
            ac = d.queue_used
        else:
            ac = classify(pkt.dscp, self.config.dscp_map)
        self._enqueue(node, pkt, ac)

    def _enqueue(self, node: str, pkt: IpPacket, ac: str) -> bool:
        pkt.hops.append((node, self.sim.now, pkt.dscp))
        if self.packet_log is not None:
            self.packet_log.append(("enq", self.sim.now, node, pkt.flow_id, pkt.seq, ac,
                                    pkt.dscp, self.macs[node].queue_length(ac)))
        nh = route(node, pkt, self.flows[pkt.flow_id].path)
        return self.macs[node].enqueue(pkt, ac, nh)

    def _enqueue_from_ap(self, pkt: IpPacket) -> None:
        self._enqueue(AP, pkt, classify(pkt.dscp, self.config.dscp_map))

    # -- reception ----------------------------------------------------------

    def _mac_deliver(self, node: str, src: str, pkt: IpPacket) -> None:
        key = (src, node, pkt.flow_id)
        self.rx_count[key] = self.rx_count.get(key, 0) + 1
        self._receive(node, pkt)

    def _receive(self, node: str, pkt: IpPacket) -> None:
        if node != pkt.dst:
            if node != A:
                raise RuntimeError(f"{pkt.flow_id} packet relayed by {node}")
            d = atk.dispose(self.strategy, self.flows[pkt.flow_id].role, pkt)
            pkt.dscp = d.dscp_out
            self._enqueue(A, pkt, d.queue_used)
            return
        if self.shaper is not None and node == AP and pkt.flow_id == self.attack_flow:
            self._shape(pkt)
            return
        self._deliver_local(pkt)

    def _shape(self, pkt: IpPacket) -> None:
        if self.shaper.handle(pkt) == "drop":
            self.stats[pkt.flow_id].record_drop("shaper", self.sim.now)

    def _deliver_local(self, pkt: IpPacket) -> None:
        now = self.sim.now
        payload = pkt.payload
        if payload[0] == "ack":
            self.senders[self.flows[pkt.flow_id].reverse].on_ack(payload[1])
            return
        f = self.flows[pkt.flow_id]
        _, seq, length = payload
        if f.transport == "cbr":
            first = True
        else:
            first = self.receivers[f.id].receive(seq, length, pkt.dscp)
        if first:
            self.stats[f.id].record_delivery(length, pkt.created_at, now)
            if self.delivery_log is not None:
                self.delivery_log.append((f.id, length, pkt.created_at, now,
                                          pkt.hops[0][2], pkt.dscp))

    def _ack_filter(self, pkt: IpPacket, src: str) -> bool:
        return self.ack_dropper.ack_decision(pkt.flow_id, self.sim.now)

    def _drop(self, pkt: IpPacket, cause: str) -> None:
        self.stats[pkt.flow_id].record_drop(cause, self.sim.now)

    # -- running ------------------------------------------------------------

    def run(self) -> RunSummary:
        for s in self.senders.values():
            s.start()
        if self.cbr is not None:
            self.cbr.start()
        self.sim.run_until(self.config.duration)
        return self.summary()

    def summary(self) -> RunSummary:
        c = self.config
        flows = {}
        for fid, st in sorted(self.stats.items()):
            if self.flows[fid].transport == "tcp-ack":
                continue
            ds = delay_stats(st)
            flows[fid] = FlowResult(
                fid, throughput(st, c.measured_interval, c.phy.data_rate),
                None if ds is None else ds.mean, None if ds is None else ds.p95,
                st.packets_delivered, dict(st.drops))
        extra = {"events": self.sim.dispatched}
        if self.shaper is not None:
            extra["shaper_rate_bps"] = self.shaper.rate
        if self.ack_dropper is not None:
            extra["ackdrop_decisions"] = self.ack_dropper.decisions
            extra["ackdrop_acked"] = self.ack_dropper.acked
        return RunSummary(self.seed, c.fingerprint(), c.scenario, c.attack.value, c.defense,
                          c.alpha, flows, extra)


def run_scenario(config: ScenarioConfig, seed: int, **kwargs) -> RunSummary:
    return Network(config, seed, **kwargs).run()
