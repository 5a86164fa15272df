import pytest

from relaysim.channel import Channel, ChannelError
from relaysim.engine import US, Simulator
from relaysim.mac import MacFrame
from relaysim.netstack import A, AP, B, POSITIONS


class Probe:
    def __init__(self):
        self.rx = []
        self.busy = 0
        self.idle = 0

    def on_busy(self):
        self.busy += 1

    def on_idle(self):
        self.idle += 1

    def on_receive(self, tx, ok):
        self.rx.append((tx.src, tx.frame.kind, ok))


def rig(cs_range=1):
    sim = Simulator()
    ch = Channel(sim, POSITIONS, comm_range=1, cs_range=cs_range, if_range=2)
    probes = {n: Probe() for n in POSITIONS}
    for n, p in probes.items():
        ch.attach(n, p)
    return sim, ch, probes


def frame(src, dst, kind="DATA"):
    return MacFrame(kind, src, dst, 100, 0, payload=object() if kind == "DATA" else None)


def test_relay_reaches_both_neighbours():
    sim, ch, p = rig()
    out = ch.begin_transmission(A, frame(A, AP), 100 * US)
    sim.run_until(200 * US)
    assert p[B].rx == [(A, "DATA", True)]
    assert p[AP].rx == [(A, "DATA", True)]


def test_b_hidden_from_ap():
    sim, ch, p = rig()
    tx = ch.begin_transmission(B, frame(B, A), 100 * US)
    assert ch.carrier_sense(AP) == "idle"
    assert ch.carrier_sense(A) == "busy"
    sim.run_until(200 * US)
    assert p[A].rx == [(B, "DATA", True)]
    assert p[AP].rx == []


def test_symmetric_hiding():
    sim, ch, p = rig()
    ch.begin_transmission(AP, frame(AP, A), 100 * US)
    assert ch.carrier_sense(B) == "idle"
    sim.run_until(200 * US)
    assert p[B].rx == []
    assert p[A].rx == [(AP, "DATA", True)]


def test_overlap_at_relay_corrupts_both():
    sim, ch, p = rig()
    ch.begin_transmission(B, frame(B, A), 100 * US)
    sim.run_until(50 * US)
    ch.begin_transmission(AP, frame(AP, A), 100 * US)
    sim.run_until(300 * US)
    assert sorted(p[A].rx) == [(AP, "DATA", False), (B, "DATA", False)]


def test_partial_overlap_at_tail_still_corrupts():
    sim, ch, p = rig()
    ch.begin_transmission(B, frame(B, A), 100 * US)
    sim.run_until(99 * US)
    ch.begin_transmission(AP, frame(AP, A, "ACK"), 10 * US)
    sim.run_until(300 * US)
    assert (B, "DATA", False) in p[A].rx


def test_disjoint_transmissions_ok():
    sim, ch, p = rig()
    ch.begin_transmission(B, frame(B, A), 100 * US)
    sim.run_until(150 * US)
    ch.begin_transmission(AP, frame(AP, A), 100 * US)
    sim.run_until(400 * US)
    assert p[A].rx == [(B, "DATA", True), (AP, "DATA", True)]


def test_lone_transmission_outcome():
    sim, ch, _ = rig()
    tx = ch.begin_transmission(A, frame(A, AP), 100 * US)
    sim.run_until(100 * US - 1)
    assert ch.end_transmission(tx) == {B: True, AP: True}


def test_half_duplex():
    sim, ch, p = rig()
    ch.begin_transmission(A, frame(A, AP), 100 * US)
    sim.run_until(10 * US)
    ch.begin_transmission(B, frame(B, A), 20 * US)
    sim.run_until(300 * US)
    assert (B, "DATA", False) in p[A].rx


def test_double_transmit_rejected():
    sim, ch, _ = rig()
    ch.begin_transmission(A, frame(A, AP), 100 * US)
    with pytest.raises(ChannelError):
        ch.begin_transmission(A, frame(A, B), 100 * US)


def test_idle_without_traffic_and_nav():
    sim, ch, _ = rig()
    assert all(ch.carrier_sense(n) == "idle" for n in POSITIONS)
    ch.nav[A] = 50 * US
    assert ch.carrier_sense(A) == "busy"
    sim.run_until(50 * US)
    assert ch.carrier_sense(A) == "idle"


def test_wide_sensing_hears_but_cannot_decode():
    sim, ch, p = rig(cs_range=2)
    ch.begin_transmission(B, frame(B, A), 100 * US)
    assert ch.carrier_sense(AP) == "busy"
    sim.run_until(200 * US)
    assert p[AP].rx == [(B, "DATA", False)]
    assert p[AP].busy == 1 and p[AP].idle == 1


def test_busy_idle_edges_counted_once():
    sim, ch, p = rig()
    ch.begin_transmission(B, frame(B, A), 100 * US)
    ch.begin_transmission(AP, frame(AP, A), 100 * US)
    sim.run_until(300 * US)
    assert p[A].busy == 1 and p[A].idle == 1


def test_channel_log_rows():
    sim = Simulator()
    log = []
    ch = Channel(sim, POSITIONS, log=log)
    ch.begin_transmission(A, frame(A, AP), 100 * US)
    sim.run_until(200 * US)
    kinds = [r[0] for r in log]
    assert kinds == ["tx", "rx", "rx"]
    assert log[0][5] is False  # medium was idle before the frame
