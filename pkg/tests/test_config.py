import json

import pytest

from relaysim.attack import AttackStrategy
from relaysim.config import ConfigError, ScenarioConfig, dump, from_dict, load, seconds
from relaysim.engine import SEC
from relaysim.mac import AcParams


def test_methodology_defaults():
    c = ScenarioConfig()
    assert c.duration == 90 * SEC and c.warmup == 15 * SEC
    assert c.seeds == tuple(range(1, 21))
    assert c.packet_size == 1000 and c.queue_capacity == 50
    assert c.transit_direction == "up"


def test_downlink_transit_default():
    assert ScenarioConfig(scenario="downlink").transit_direction == "down"


@pytest.mark.parametrize("bad", [
    {"scenario": "sideways"}, {"alpha": 1.2}, {"defense": "Jam"}, {"attack": "Flood"},
    {"warmup": 100}, {"source_transport": "quic"}, {"seeds": []},
    {"scenario": "downlink", "source_transport": "cbr"},
])
def test_invalid(bad):
    with pytest.raises(ConfigError):
        from_dict(bad)


def test_unknown_key():
    with pytest.raises(ConfigError):
        from_dict({"durration": 10})


def test_round_trip(tmp_path):
    c = from_dict({"scenario": "downlink", "attack": "2xTRA", "duration": 30, "warmup": 5,
                   "edca": {"BE": {"aifsn": 3, "cw_min": 15, "cw_max": 1023}},
                   "tcp": {"max_window": None}, "seeds": [4, 5]})
    path = tmp_path / "c.json"
    path.write_text(dump(c))
    back = load(str(path))
    assert back == c
    assert back.attack is AttackStrategy.TWO_TRA
    assert back.edca["BE"] == AcParams(3, 15, 1023)


def test_fingerprint_ignores_seeds():
    a = ScenarioConfig(seeds=(1, 2))
    assert a.fingerprint() == a.replace(seeds=(3,)).fingerprint()
    assert a.fingerprint() != a.replace(alpha=0.5).fingerprint()


def test_times_in_seconds():
    assert from_dict({"duration": 2.5, "warmup": 1}).duration == seconds(2.5) == 2_500_000_000
    assert json.loads(dump(ScenarioConfig()))["duration"] == 90


def test_bad_json(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load(str(p))


def test_shape_needs_room_for_measurement():
    with pytest.raises(ConfigError):
        ScenarioConfig(defense="Shape", warmup=2 * SEC)
