"""Post-run consistency checks over the event logs of one :class:`Network`.

Each check returns a list of violation messages; an empty list means the
property held for the whole run. The network must be built with
``check=True, log_events=True``.
"""

from __future__ import annotations

import bisect

from .attack import DISPOSITIONS, AttackStrategy, dispose
from .engine import SEC
from .mac import PRIORITY
from .metrics import replay_bits
from .netstack import A, AP, classify
from .scenario import Network

ROLES = ("transit", "source")
SHAPER_EPS = 0.02
SHAPER_WINDOW = 10 * SEC


def dispatch_order(net: Network) -> list[str]:
    order = net.sim.order
    bad = [f"event {i}: {order[i]} after {order[i - 1]}"
           for i in range(1, len(order)) if order[i] <= order[i - 1]]
    return bad[:5]


def _tx_intervals(net: Network) -> dict[str, list[tuple[int, int, str]]]:
    out: dict[str, list] = {}
    for row in net.channel_log:
        if row[0] == "tx":
            _, start, src, kind, _dst, _busy, end = row
            out.setdefault(src, []).append((start, end, kind))
    return out


def no_transmit_while_busy(net: Network) -> list[str]:
    """Contention-initiated frames (RTS) never start while the sender senses busy."""
    return [f"{row[2]} sent RTS at {row[1]} while busy"
            for row in net.channel_log if row[0] == "tx" and row[3] == "RTS" and row[5]][:5]


def half_duplex(net: Network) -> list[str]:
    own = _tx_intervals(net)
    starts = {n: [s for s, _, _ in iv] for n, iv in own.items()}
    bad = []
    for row in net.channel_log:
        if row[0] != "rx" or not row[5]:
            continue
        _, end, node, kind, src, _ok, start = row
        iv = own.get(node, ())
        i = bisect.bisect_left(starts.get(node, ()), end)
        # own transmissions never overlap, so only the last one starting before ``end`` matters
        if i and iv[i - 1][1] > start:
            bad.append(f"{node} decoded {kind} from {src} while transmitting")
    return bad[:5]


def range_respected(net: Network) -> list[str]:
    ch = net.channel
    return [f"{row[3]} from {row[4]} decoded {ch.hops(row[2], row[4])} hops away"
            for row in net.channel_log
            if row[0] == "rx" and row[5] and ch.hops(row[2], row[4]) > ch.comm_range][:5]


def queue_cap(net: Network) -> list[str]:
    return [f"{name}/{q.label} reached {q.max_len}"
            for name, mac in net.macs.items() for q in mac.queues.values()
            if q.max_len > q.capacity]


def cw_bounds(net: Network) -> list[str]:
    return [f"{name}/{q.label} cw={q.cw}"
            for name, mac in net.macs.items() for q in mac.queues.values()
            if not q.params.cw_min <= q.cw <= q.params.cw_max]


def dscp_consistency(net: Network) -> list[str]:
    """BOA and honest runs keep every designation; TRA runs show exactly the rewrite."""
    s = net.strategy
    bad = []
    for flow, _len, _c, _d, origin, final in net.delivery_log:
        f = net.flows[flow]
        if not s.is_tra:
            expected = origin
        elif A in f.path[1:-1]:
            expected = dispose(s, f.role).dscp_out
        else:
            expected = origin
        if final != expected:
            bad.append(f"{flow}: dscp {origin} -> {final}, expected {expected}")
    if s.is_tra:
        # the AP classifies reverse ACKs of relayed flows by their rewritten marking
        want = classify(dispose(s, "transit").dscp_out, net.config.dscp_map)
        for row in net.packet_log:
            _, t, node, flow, _seq, ac, dscp, _ql = row
            f = net.flows[flow]
            if (node == AP and f.transport == "tcp-ack" and A in f.path[1:-1]
                    and t >= net.config.warmup and ac != want):
                bad.append(f"AP queued {flow} ACK in {ac}, expected {want}")
                break
    return bad[:5]


def paths_respected(net: Network) -> list[str]:
    bad = []
    for row in net.packet_log:
        _, _t, node, flow, *_ = row
        if node not in net.flows[flow].path:
            bad.append(f"{flow} queued at {node}")
    return bad[:5]


def queue_merge(net: Network) -> list[str]:
    """Under single-AC remapping A feeds a single queue after warm-up."""
    if net.strategy not in (AttackStrategy.TRA_UP, AttackStrategy.TRA_DOWN):
        return []
    used = {row[5] for row in net.packet_log
            if row[2] == A and row[1] >= net.config.warmup}
    return [] if len(used) <= 1 else [f"A used queues {sorted(used)}"]


def tcp_conservation(net: Network) -> list[str]:
    bad = []
    for fid, rx in net.receivers.items():
        tx = net.senders[fid]
        if rx.last_ack != rx.rcv_next:
            bad.append(f"{fid}: last ACK {rx.last_ack} behind rcv_next {rx.rcv_next}")
        if tx.snd_una > rx.rcv_next:
            bad.append(f"{fid}: sender acked {tx.snd_una} beyond receiver {rx.rcv_next}")
        if tx.cwnd < 1 or tx.ssthresh < 2:
            bad.append(f"{fid}: cwnd {tx.cwnd} ssthresh {tx.ssthresh} below floor")
    return bad


def mac_accounting(net: Network) -> list[str]:
    """Every MAC-ACKed frame was delivered once; extra deliveries only from lost ACKs."""
    if net.config.defense != "Off":
        return []
    bad = []
    for name, mac in net.macs.items():
        for flow, acked in mac.mac_acked.items():
            f = net.flows[flow]
            nxt = f.path[f.path.index(name) + 1]
            got = net.rx_count.get((name, nxt, flow), 0)
            if got < acked:
                bad.append(f"{name}->{nxt} {flow}: {acked} acked but {got} delivered")
    return bad


def shaper_rate_bound(net: Network) -> list[str]:
    sh = net.shaper
    if sh is None or sh.bucket is None:
        return []
    limit = sh.bucket.rate * (1 + SHAPER_EPS)
    deps = sh.bucket.departures
    times = [t for t, _ in deps]
    bad = []
    for i, (t0, _) in enumerate(deps):
        if t0 + SHAPER_WINDOW > net.config.duration:
            break
        j = bisect.bisect_left(times, t0 + SHAPER_WINDOW)
        bits = sum(b for _, b in deps[i:j])
        if bits * SEC / SHAPER_WINDOW > limit:
            bad.append(f"{bits} bits in 10 s from {t0} exceed {limit:.0f} b/s")
            break
    return bad


def defense_selectivity(net: Network) -> list[str]:
    targets = set(net.policy.target_flows)
    bad = []
    if net.ack_dropper is not None:
        bad += [f"ACK withheld for {f}" for f in net.ack_dropper.withheld if f not in targets]
    if net.shaper is not None:
        bad += [f"shaper handled {f}" for f in net.shaper.flows_seen if f not in targets]
    for fid, st in net.stats.items():
        if fid not in targets and st.drops["shaper"]:
            bad.append(f"{fid} dropped by shaper")
    return bad


def accounting(net: Network) -> list[str]:
    c = net.config
    bad = []
    total = 0.0
    for fid, st in net.stats.items():
        if replay_bits(net.delivery_log, fid, c.warmup) != st.bits_delivered:
            bad.append(f"{fid}: replayed bits differ")
        total += st.bits_delivered / (c.measured_interval / SEC) / c.phy.data_rate
    if total > 1.0:
        bad.append(f"throughput sum {total:.3f} > 1")
    return bad


def disposition_total() -> list[str]:
    missing = [f"{s.value}/{r}" for s in AttackStrategy for r in ROLES
               if (s, r) not in DISPOSITIONS]
    extra = [str(k) for k in DISPOSITIONS if k[1] not in ROLES]
    bad_queue = [str(k) for k, d in DISPOSITIONS.items() if d.queue_used not in PRIORITY]
    return missing + extra + bad_queue


RUN_CHECKS = {
    "dispatch-order": dispatch_order,
    "no-rts-while-busy": no_transmit_while_busy,
    "half-duplex": half_duplex,
    "decode-range": range_respected,
    "queue-cap": queue_cap,
    "cw-bounds": cw_bounds,
    "dscp": dscp_consistency,
    "static-paths": paths_respected,
    "queue-merge": queue_merge,
    "tcp-conservation": tcp_conservation,
    "mac-accounting": mac_accounting,
    "shaper-rate": shaper_rate_bound,
    "defense-selectivity": defense_selectivity,
    "replay-accounting": accounting,
}


def check_network(net: Network) -> dict[str, list[str]]:
    return {name: fn(net) for name, fn in RUN_CHECKS.items()}


def checked_run(config, seed: int) -> tuple[Network, dict[str, list[str]]]:
    net = Network(config, seed, check=True, log_events=True)
    net.run()
    return net, check_network(net)
