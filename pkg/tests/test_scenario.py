from relaysim.attack import AttackStrategy as S
from relaysim.config import ScenarioConfig
from relaysim.harness import summary_from_dict, summary_to_dict
from relaysim.scenario import Network, run_scenario

from helpers import short


def test_honest_uplink_full_run():
    r = run_scenario(ScenarioConfig(), 1)
    assert r.thr("T") > r.thr("S")
    assert r.delay("T") < 100


def test_two_tra_starves_transit():
    honest = run_scenario(ScenarioConfig(), 1).thr("T")
    attacked = run_scenario(ScenarioConfig(attack="TwoTra"), 1).thr("T")
    loss = 1 - attacked / honest
    assert 0.75 <= loss <= 1.0


def test_deterministic_summary():
    c = short(attack="TraUp")
    assert run_scenario(c, 4) == run_scenario(c, 4)


def test_capacity_bound():
    for s in (S.NONE, S.TRA_UP, S.TWO_TRA):
        r = run_scenario(short(attack=s), 2)
        assert sum(f.normalized_throughput for f in r.flows.values()) <= 1


def test_summary_only_data_flows():
    assert set(run_scenario(short(), 1).flows) == {"S", "T"}
    assert set(run_scenario(short(scenario="downlink"), 1).flows) == {"S'", "T"}


def test_summary_json_round_trip():
    r = run_scenario(short(defense="AckDrop", alpha=0.5), 1)
    assert summary_from_dict(summary_to_dict(r)) == r


def test_transit_acks_follow_remarking():
    """Under a downgrade the AP queues T's ACKs as BE with DSCP 0."""
    net = Network(short(attack="TraDown"), 1, log_events=True)
    net.run()
    rows = [r for r in net.packet_log if r[2] == "AP" and r[3] == "T'" and r[1] > net.config.warmup]
    assert rows and all(r[5] == "BE" and r[6] == 0 for r in rows)
    honest = Network(short(), 1, log_events=True)
    honest.run()
    rows = [r for r in honest.packet_log if r[2] == "AP" and r[3] == "T'"]
    assert rows and all(r[5] == "VO" and r[6] == 46 for r in rows)


def test_cbr_source_fills_relay_queue():
    net = Network(short(attack="TraUp", source_transport="cbr"), 1)
    r = net.run()
    assert net.macs["A"].queues["VO"].max_len == 50
    assert r.flows["T"].normalized_throughput < r.flows["S"].normalized_throughput
