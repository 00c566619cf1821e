import csv
import json
import os
import re
import subprocess
import sys

import pytest

from emfsim.cli import explain, main
from emfsim.config import ConfigError, apply_overrides, parse_config
from emfsim.profiles import preset


def test_minimal_config_defaults():
    cfg = parse_config('{"scenarios": ["5G"], "trials": 10, "master_seed": 1}')
    assert [p.name for p in cfg.scenarios] == ["5G"]
    assert cfg.trials == 10 and cfg.master_seed == 1
    assert cfg.parallelism == 1 and cfg.record_level == "summary" and cfg.output_dir == "results"
    assert cfg.limits.sar_limit_w_kg == 1.6 and cfg.limits.pd_limit_w_m2 == 10.0
    assert cfg.deployment.mode == "ppp" and cfg.deployment.ue_count == 10
    assert cfg.protocol.emission_metric == "sar" and cfg.protocol.hysteresis_w_kg == 0.0


def test_empty_config_runs_all_presets():
    assert [p.name for p in parse_config("{}").scenarios] == ["5G", "4G", "3.9G"]


def test_negative_trials_named():
    with pytest.raises(ConfigError, match="trials"):
        parse_config('{"trials": -5}')


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="config.limits: unknown key.*'sar_limitt'"):
        parse_config('{"limits": {"sar_limitt": 2.0}}')
    with pytest.raises(ConfigError, match="'bogus'"):
        parse_config('{"bogus": 1}')


def test_syntax_error_location():
    with pytest.raises(ConfigError, match=r"syntax error at line 2, column \d+"):
        parse_config('{"trials": 10,\n  "master_seed" 3}')


@pytest.mark.parametrize("text,where", [
    ('{"scenarios": ["6G"]}', "scenarios[0]"),
    ('{"deployment": {"mode": "hex"}}', "deployment.mode"),
    ('{"protocol": {"emission_metric": "volume"}}', "emission_metric"),
    ('{"record_level": "all"}', "record_level"),
    ('{"master_seed": 1.5}', "master_seed"),
    ('{"limits": {"sar_trigger_w_kg": 5.0}}', "limits"),
    ('{"scenarios": [{"name": "x", "base": "5G", "carrier_ghz": 1}]}', "carrier_ghz"),
])
def test_semantic_errors_name_location(text, where):
    with pytest.raises(ConfigError, match=re.escape(where)):
        parse_config(text)


def test_inline_scenario():
    cfg = parse_config('{"scenarios": [{"name": "5G-big", "base": "5G", "cell_radius_m": 500}, "4G"]}')
    big = cfg.scenario("5G-big")
    assert big.cell_radius_m == 500.0 and big.radio.carrier_hz == 28e9 and big.base == "5G"
    assert cfg.scenario("4G") == preset("4G")


def test_round_trip_resolved_config():
    cfg = parse_config('{"scenarios": ["3.9G", {"name": "n3", "base": "5G", "pathloss_exponent": 3}],'
                       ' "trials": 7, "deployment": {"window_m": [900, 800]}, "protocol": {"hysteresis_w_kg": 0.1}}')
    again = parse_config(cfg.to_json())
    assert again.to_dict() == cfg.to_dict()
    assert again == cfg


def test_overrides_take_precedence():
    cfg = apply_overrides(parse_config('{"trials": 50, "master_seed": 2}'), trials=5, seed=9, scenarios=["4G"])
    assert (cfg.trials, cfg.master_seed, [p.name for p in cfg.scenarios]) == (5, 9, ["4G"])
    with pytest.raises(ConfigError, match="trials"):
        apply_overrides(cfg, trials=0)


# CLI

def write_config(tmp_path, **kw):
    body = {"trials": 4, "master_seed": 5, "deployment": {"ue_count": 5}, "figures": False}
    body.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(body))
    return str(path)


def test_run_twice_byte_identical(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["--config", cfg, "--out", str(tmp_path / "b")]) == 0
    for name in ("summary.csv", "figure1_data.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    # the records differ only in the echoed output directory
    a, b = (json.loads((tmp_path / d / "run_record.json").read_text()) for d in ("a", "b"))
    a["resolved_config"].pop("output_dir"), b["resolved_config"].pop("output_dir")
    assert a == b


def test_figure1_layout(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", cfg, "--scenario", "5G", "--scenario", "4G", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "figure1_data.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["technology", "direction", "mean_sar_w_kg", "ci_half_width"]
    assert len(rows) - 1 == 2 * 2
    assert {(r[0], r[1]) for r in rows[1:]} == {(t, d) for t in ("5G", "4G") for d in ("downlink", "uplink")}


def test_trials_flag_echoed(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", cfg, "--trials", "2", "--scenario", "4G", "--out", str(tmp_path)]) == 0
    echoed = json.loads(capsys.readouterr().out)
    assert echoed["trials"] == 2
    record = json.loads((tmp_path / "run_record.json").read_text())
    assert record["resolved_config"]["trials"] == 2 and record["trials"] == 2


def test_summary_recomputable_from_record(tmp_path, capsys):
    from emfsim.report import SUMMARY_COLUMNS, fmt, stats_from_record

    cfg = write_config(tmp_path)
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
    record = json.loads((tmp_path / "run_record.json").read_text())
    stats = stats_from_record(record)
    with open(tmp_path / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6
    for row in rows:
        s = stats[row["technology"]][row["direction"]]
        for col in SUMMARY_COLUMNS[2:-1]:
            assert row[col] == fmt(getattr(s, col))


def test_figures_written(tmp_path, capsys):
    cfg = write_config(tmp_path, figures=True, trials=2)
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert (tmp_path / "figure1.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_config_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"limits": {"sar_limitt": 1}}')
    assert main(["run", "--config", str(path)]) == 2
    assert "sar_limitt" in capsys.readouterr().err


def test_unwritable_output_dir(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--config", write_config(tmp_path), "--out", str(blocker / "sub")]) == 1
    assert "not writable" in capsys.readouterr().err


def test_explain_no_trigger():
    cfg = parse_config('{"scenarios": ["4G"], "trials": 3, "deployment": {"ue_count": 5}}')
    text = explain(cfg, 0, 0)
    assert "no trigger; serving BS retained" in text


def test_explain_invalid_indices():
    cfg = parse_config('{"trials": 3, "deployment": {"ue_count": 10}}')
    with pytest.raises(ConfigError, match=r"valid range is 0\.\.9"):
        explain(cfg, 0, 20)
    with pytest.raises(ConfigError, match=r"valid range is 0\.\.2"):
        explain(cfg, 5, 0)


def test_explain_cli_error_exit(capsys):
    assert main(["explain", "--trial", "0", "--ue", "99"]) == 2
    assert "valid range" in capsys.readouterr().err


def test_explain_matches_run_record(tmp_path, capsys):
    cfg_path = write_config(tmp_path, scenarios=["5G"], trials=6, limits={"sar_trigger_w_kg": 0.2},
                            record_level="decisions")
    assert main(["run", "--config", cfg_path, "--out", str(tmp_path)]) == 0
    record = json.loads((tmp_path / "run_record.json").read_text())
    cfg = parse_config((tmp_path / "cfg.json").read_text())
    checked = 0
    for trial in record["records"]:
        for d in trial["decisions"]:
            if d["cause"] != "sar_trigger":
                continue
            text = explain(cfg, trial["index"], d["ue"])
            argmin = [ln for ln in text.splitlines() if ln.endswith("<- argmin")]
            assert len(argmin) == 1
            bs, _, emission = argmin[0].split()[:3]
            assert int(bs) == d["to_bs"]
            assert float(emission) == d["predicted_sar_after"]
            assert f"handover: BS {d['from_bs']} -> BS {d['to_bs']}" in text
            assert f"{len([ln for ln in text.splitlines() if re.match(r'^ +[0-9]+ ', ln)])}" == str(
                d["candidates_evaluated"])
            checked += 1
    assert checked > 0


def test_module_entry_point(tmp_path):
    env = dict(os.environ, MPLBACKEND="Agg")
    out = subprocess.run([sys.executable, "-m", "emfsim", "run", "--scenario", "4G", "--trials", "1",
                          "--no-figures", "--out", str(tmp_path)], capture_output=True, text=True, env=env)
    assert out.returncode == 0, out.stderr
    assert json.loads(out.stdout)["trials"] == 1
    assert "wrote" in out.stderr
