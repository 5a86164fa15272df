import pytest

from relaysim.attack import AttackStrategy as S
from relaysim.invariants import check_network, checked_run, disposition_total
from relaysim.scenario import Network

from helpers import short

CASES = ([("uplink", s, "Off") for s in S] + [("downlink", s, "Off") for s in S]
         + [("uplink", S.TRA_DOWN, "Shape"), ("uplink", S.TRA_DOWN, "AckDrop"),
            ("downlink", S.TRA_DOWN, "AckDrop"), ("downlink", S.BOA_DOWN, "Shape")])


@pytest.mark.parametrize("scenario,strategy,defense", CASES,
                         ids=[f"{a}-{b.value}-{c}" for a, b, c in CASES])
def test_run_invariants(scenario, strategy, defense):
    c = short(scenario=scenario, attack=strategy, defense=defense, alpha=0.5)
    _, res = checked_run(c, 1)
    assert {k: v for k, v in res.items() if v} == {}


def test_cbr_invariants():
    _, res = checked_run(short(attack="TraUp", source_transport="cbr"), 1)
    assert {k: v for k, v in res.items() if v} == {}


def test_disposition_table_total():
    assert disposition_total() == []


def test_checks_catch_a_violation():
    net = Network(short(), 1, check=True, log_events=True)
    net.run()
    net.channel_log.append(("tx", 10**10, "A", "RTS", "AP", True, 10**10 + 1))
    net.macs["A"].queues["BE"].max_len = 51
    res = check_network(net)
    assert res["no-rts-while-busy"] and res["queue-cap"]


def test_dscp_check_catches_rewrite_under_boa():
    net = Network(short(attack="BoaDown"), 1, check=True, log_events=True)
    net.run()
    flow, n, c, d, origin, _ = net.delivery_log[-1]
    net.delivery_log.append((flow, n, c, d, origin, 8))
    assert check_network(net)["dscp"]


def test_honest_is_identity_plumbing():
    a = Network(short(), 5, trace=True)
    a.run()
    b = Network(short(attack="None"), 5, trace=True)
    b.run()
    assert a.sim.trace_digest == b.sim.trace_digest
