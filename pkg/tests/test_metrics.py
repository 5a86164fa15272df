import math
import random

import pytest

from relaysim.engine import MS, SEC
from relaysim.metrics import FlowStats, Interval, ci95, delay_stats, replay_bits, throughput


def stats_with(bits, warmup=0):
    st = FlowStats("S", warmup)
    st.bits_delivered = bits
    return st


def test_half_capacity():
    assert throughput(stats_with(5_500_000), 1 * SEC, 11_000_000) == pytest.approx(0.5)


def test_zero_delivery():
    assert throughput(stats_with(0), 75 * SEC, 11_000_000) == 0


def test_arithmetic_example():
    assert throughput(stats_with(41_250_000), 75 * SEC, 11_000_000) == pytest.approx(0.05)


def test_zero_interval_rejected():
    with pytest.raises(ValueError):
        throughput(stats_with(1), 0, 11_000_000)


def test_warmup_exclusion():
    st = FlowStats("S", warmup=15 * SEC)
    st.record_delivery(1000, 14 * SEC, 16 * SEC)    # created during warm-up
    st.record_delivery(1000, 15 * SEC, 15 * SEC + 5 * MS)
    assert st.packets_delivered == 1 and st.delay_samples == [5 * MS]
    st.record_drop("shaper", 10 * SEC)
    assert st.drops["shaper"] == 0


def test_delay_mean():
    d = delay_stats([10 * MS, 20 * MS, 30 * MS])
    assert d.mean == pytest.approx(20) and d.itu_ok


def test_delay_over_bound():
    assert not delay_stats([150 * MS] * 5).itu_ok


def test_delay_bound_inclusive():
    assert delay_stats([100 * MS]).itu_ok


def test_delay_absent_when_empty():
    assert delay_stats([]) is None


def test_p95():
    d = delay_stats([i * MS for i in range(1, 101)])
    assert d.p95 == 95


def test_ci_constant():
    assert ci95([0.3] * 7).half_width == 0


def test_ci_t_table():
    iv = ci95([1, 2, 3, 4, 5])
    # t(0.975, 4) = 2.776, s = 1.5811
    assert iv.mean == 3
    assert iv.half_width == pytest.approx(2.776 * 1.5811 / math.sqrt(5), abs=1e-3)
    assert iv.half_width == pytest.approx(1.9634, abs=1e-3)


def test_ci_monte_carlo():
    rng = random.Random(11)
    widths = [ci95([rng.gauss(0, 1) for _ in range(20)]).half_width for _ in range(400)]
    assert sum(widths) / len(widths) == pytest.approx(2.093 / math.sqrt(20), abs=0.1)


def test_ci_needs_two():
    with pytest.raises(ValueError):
        ci95([1.0])


def test_interval_overlap():
    assert Interval(1, 0.5).overlaps(Interval(2, 0.6))
    assert not Interval(1, 0.4).overlaps(Interval(2, 0.5))


def test_replay():
    log = [("S", 1000, 16 * SEC, 17 * SEC, 0, 0), ("S", 1000, 1 * SEC, 16 * SEC, 0, 0),
           ("T", 1000, 16 * SEC, 17 * SEC, 46, 46)]
    assert replay_bits(log, "S", 15 * SEC) == 8000
