import pytest

from relaysim.engine import MS, SEC, Simulator
from relaysim.transport import ACK_BYTES, CbrSource, TcpError, TcpParams, TcpReceiver, TcpSender

UNBOUNDED = TcpParams(max_window=None)


def sender(params=UNBOUNDED, **state):
    sim = Simulator()
    out = []
    s = TcpSender(sim, "F", lambda seq, ln, rx: out.append((seq, rx)), params)
    for k, v in state.items():
        setattr(s, k, v)
    return sim, s, out


def test_window_two_empty_pipe():
    _, s, out = sender(cwnd=2.0)
    assert s.maybe_send() == [0, 1000]


def test_window_full_sends_nothing():
    _, s, out = sender(cwnd=2.0)
    s.maybe_send()
    assert s.maybe_send() == []


def test_max_window_caps_flight():
    _, s, out = sender(TcpParams(max_window=3), cwnd=10.0)
    s.maybe_send()
    assert s.flight == 3


def test_slow_start_doubles():
    _, s, out = sender()
    s.start()
    assert len(out) == 1
    s.on_ack(1000)
    assert s.cwnd == 2
    s.on_ack(2000)
    s.on_ack(3000)
    assert s.cwnd == 4 and s.flight == 4


def test_congestion_avoidance_matches_aimd_oracle():
    _, s, out = sender(cwnd=4.0, ssthresh=4.0)
    s.maybe_send()
    cwnd = 4.0
    acked = 0
    for _ in range(10):                   # ten round trips, every segment ACKed
        for _ in range(s.flight):
            acked += 1000
            s.on_ack(acked)
            cwnd += 1 / cwnd
    assert s.cwnd == pytest.approx(cwnd, rel=1e-12)
    assert 12.5 < s.cwnd < 14.5           # about one segment per RTT


def test_fast_retransmit():
    _, s, out = sender(cwnd=8.0, ssthresh=100.0)
    s.maybe_send()
    out.clear()
    for _ in range(3):
        s.on_ack(0)
    assert s.ssthresh == 4
    assert out[0] == (0, True)
    assert s.state == "fast-recovery"


def test_old_ack_only_counts():
    _, s, out = sender(cwnd=3.0)
    s.maybe_send()
    s.on_ack(1000)
    n = len(out)
    s.on_ack(1000)
    assert s.dup_acks == 1 and len(out) == n


def test_ack_beyond_sent_rejected():
    _, s, _ = sender()
    s.start()
    with pytest.raises(TcpError):
        s.on_ack(5000)


def test_rto_collapse():
    sim, s, out = sender(cwnd=10.0, ssthresh=100.0)
    s.maybe_send()
    out.clear()
    s.on_rto()
    assert s.cwnd == 1 and s.ssthresh == 5
    assert out == [(0, True)]


def test_rto_backoff_doubles():
    sim, s, out = sender(TcpParams(rto_initial_ns=200 * MS, max_window=None))
    s.start()
    sim.run_until(200 * MS)
    assert s.timeouts == 1 and s.rto == 400 * MS
    sim.run_until(600 * MS)
    assert s.timeouts == 2 and s.rto == 800 * MS


def test_ack_before_timer_rearms():
    sim, s, out = sender(TcpParams(rto_initial_ns=200 * MS, max_window=None), cwnd=2.0)
    s.maybe_send()
    sim.run_until(190 * MS)
    s.on_ack(1000)
    sim.run_until(250 * MS)
    assert s.timeouts == 0 and s.cwnd == 3


def test_rtt_estimate_and_floor():
    sim, s, _ = sender()
    s.start()
    sim.run_until(10 * MS)
    s.on_ack(1000)
    assert s.srtt == 10 * MS
    assert s.rto == 200 * MS              # 10 + 4*5 ms is under the floor


def test_receiver_in_order():
    acks = []
    r = TcpReceiver(lambda a, d: acks.append((a, d)))
    assert r.receive(0, 1000, 46)
    assert acks == [(1000, 46)]


def test_receiver_gap_dupack():
    acks = []
    r = TcpReceiver(lambda a, d: acks.append(a))
    r.receive(0, 1000, 0)
    r.receive(2000, 1000, 0)
    r.receive(3000, 1000, 0)
    assert acks == [1000, 1000, 1000]
    r.receive(1000, 1000, 0)
    assert acks[-1] == 4000


def test_receiver_duplicate_not_first():
    r = TcpReceiver(lambda a, d: None)
    assert r.receive(0, 1000, 0)
    assert not r.receive(0, 1000, 0)
    assert r.delivered_bytes == 1000


@pytest.mark.parametrize("dscp", [46, 0])
def test_ack_echoes_arriving_marking(dscp):
    acks = []
    TcpReceiver(lambda a, d: acks.append(d)).receive(0, 1000, dscp)
    assert acks == [dscp]


def test_ack_size():
    assert ACK_BYTES == 40


def test_cbr_spacing():
    sim = Simulator()
    times = []
    CbrSource(sim, "S", 11_000_000, lambda seq: times.append(sim.now), 1000).start()
    sim.run_until(10 * MS)
    gaps = {b - a for a, b in zip(times, times[1:])}
    assert gaps == {8000 * SEC // 11_000_000}


def test_cbr_rate_positive():
    with pytest.raises(ValueError):
        CbrSource(Simulator(), "S", 0, lambda s: None)
