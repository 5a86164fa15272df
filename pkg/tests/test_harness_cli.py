import json
import os

import pytest

from relaysim import harness
from relaysim.acceptance import CriterionResult
from relaysim.attack import AttackStrategy as S
from relaysim.cli import main, parse_seeds
from relaysim.config import seconds
from relaysim.harness import SweepError, SweepSpec, run_batch, run_sweep
from relaysim.report import ReportError, acceptance_text, emit_report

from helpers import short

TINY = dict(duration=seconds(6), warmup=seconds(2), seeds=(1, 2))
TINY_ARGS = ["--duration", "6", "--warmup", "2", "--seeds", "2"]


def test_empty_sweep_rejected():
    with pytest.raises(ValueError):
        SweepSpec("attack", ())


def test_single_axis_only():
    with pytest.raises(ValueError):
        SweepSpec("duration", (1,))


def test_attack_sweep_table():
    order = (S.NONE, S.BOA_UP, S.BOA_DOWN, S.TRA_UP, S.TRA_DOWN, S.TWO_TRA)
    res = run_sweep(SweepSpec("attack", order, short(**TINY)))
    rows = [r for r in res.rows() if r.metric == "normalized_throughput" and r.flow == "S"]
    assert [r.value for r in rows] == [s.value for s in order]
    assert rows[0].value == "None" and all(r.n == 2 for r in rows)


def test_sweep_failure_keeps_partial(monkeypatch):
    real = harness.run_scenario

    def flaky(config, seed, **kw):
        if config.alpha == 0.5:
            raise RuntimeError("boom")
        return real(config, seed, **kw)

    monkeypatch.setattr(harness, "run_scenario", flaky)
    spec = SweepSpec("alpha", (1.0, 0.5, 0.0),
                     short(attack="TraDown", defense="AckDrop", **TINY))
    with pytest.raises(SweepError) as err:
        run_sweep(spec)
    assert list(err.value.partial.runs) == [1.0]


def test_cache_reuse(tmp_path, monkeypatch):
    c = short(**TINY)
    first = run_batch(c, cache_dir=str(tmp_path))
    assert len(os.listdir(tmp_path)) == 2
    monkeypatch.setattr(harness, "run_scenario", lambda *a, **k: pytest.fail("not cached"))
    assert run_batch(c, cache_dir=str(tmp_path)) == first


def test_report_inventory(tmp_path):
    res = run_sweep(SweepSpec("attack", (S.NONE, S.TRA_UP), short(**TINY)))
    files = emit_report(res, str(tmp_path), "uplink", acceptance=[])
    assert sorted(os.path.basename(f) for f in files) == [
        "acceptance.txt", "uplink.svg", "uplink_delay.csv", "uplink_throughput.csv"]
    head = (tmp_path / "uplink_throughput.csv").read_text().splitlines()[0]
    assert head == "value,flow,metric,mean,half_width,ci_lo,ci_hi,n"


def test_empty_report_writes_nothing(tmp_path, caplog):
    assert emit_report(None, str(tmp_path / "r"), "x") == []
    assert not (tmp_path / "r").exists()
    assert "empty" in caplog.text


def test_unwritable_report(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    res = run_sweep(SweepSpec("attack", (S.NONE,), short(**TINY)))
    with pytest.raises(ReportError):
        emit_report(res, str(blocker / "sub"), "x")


def test_acceptance_text_lists_failures():
    text = acceptance_text([CriterionResult("A1", True, "ok"), CriterionResult("A4", False, "no")])
    assert "A4 FAIL" in text and text.strip().endswith("failing: A4")


@pytest.mark.parametrize("text,seeds", [("3", (1, 2, 3)), ("4-6", (4, 5, 6)), ("2,9", (2, 9))])
def test_parse_seeds(text, seeds):
    assert parse_seeds(text) == seeds


def test_cli_run_outputs_and_determinism(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = main(["run", "--scenario", "uplink", "--attack", "TraUp", *TINY_ARGS,
                     "--out", str(out)])
        assert code == 0
        outs.append(out)
    names = sorted(os.listdir(outs[0]))
    assert {"uplink_runs.csv", "uplink_throughput.csv", "uplink_delay.csv", "uplink.svg",
            "acceptance.txt", "config.json"} <= set(names)
    for n in names:
        assert (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes(), n


def test_cli_config_file_and_echo(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "downlink", "duration": 6, "warmup": 2,
                               "seeds": [1, 2]}))
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--attack", "BoaDown", "--out", str(out)]) == 0
    echo = json.loads((out / "config.json").read_text())
    assert echo["scenario"] == "downlink" and echo["attack"] == "BoaDown"
    assert echo["transit_direction"] == "down"


def test_cli_event_logs(tmp_path):
    out = tmp_path / "o"
    assert main(["run", *TINY_ARGS, "--seeds", "1", "--log-events", "--out", str(out)]) == 0
    d = out / "events" / "seed-1"
    assert sorted(os.listdir(d)) == ["channel.csv", "delivery.csv", "queue.csv"]


def test_cli_failing_criterion_exit_1(tmp_path):
    # carrier sensing limited to one hop starves the transit flow
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"cs_range": 1}))
    out = tmp_path / "o"
    code = main(["run", "--config", str(cfg), "--duration", "20", "--warmup", "5",
                 "--seeds", "3", "--out", str(out)])
    assert code == 1
    assert "failing: A1" in (out / "acceptance.txt").read_text()


def test_cli_invalid_config(tmp_path, capsys):
    assert main(["run", "--alpha", "3", "--out", str(tmp_path)]) == 2
    assert "invalid configuration" in capsys.readouterr().err


def test_cli_unwritable_out(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", *TINY_ARGS, "--out", str(blocker / "x")]) != 0


def test_cli_alpha_sweep(tmp_path):
    out = tmp_path / "o"
    code = main(["sweep", "--axis", "alpha", "--values", "0,0.5,1", "--attack", "TraDown",
                 "--defense", "Shape", "--duration", "12", "--warmup", "6", "--seeds", "2",
                 "--out", str(out)])
    assert code in (0, 1)
    assert (out / "uplink_throughput.csv").exists() and (out / "uplink.svg").exists()
