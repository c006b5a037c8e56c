import json
import shutil
import subprocess

import pytest

from tskstreams.cli import run_cli
from tskstreams.io import make_fried, write_csv

SYNTH = json.dumps({"generator": "piecewise-linear", "d": 3, "n": 800, "noise": 0.1, "seed": 1,
                    "pieces": 2})


def test_summary_schema(tmp_path, capsys):
    code = run_cli(["--synthetic", SYNTH, "--criterion", "vr", "--strategy", "all",
                    "--out-metrics", str(tmp_path / "m.csv"), "--out-model", str(tmp_path / "model.json")])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert set(summary) == {"rmse", "rules", "mean_micros", "drift_events", "config_echo"}
    assert (tmp_path / "m.csv").read_text().startswith("index,prediction,truth,")
    model = json.loads((tmp_path / "model.json").read_text())
    assert {"dimension", "rules", "default_rule_id"} <= set(model)
    rule = model["rules"][0]
    assert {"antecedents", "consequent"} <= set(rule)
    assert {"variant", "params"} == set(rule["antecedents"][0])


def test_defaults_echoed(tmp_path):
    out = tmp_path / "s.json"
    assert run_cli(["--synthetic", SYNTH, "--out-summary", str(out)]) == 0
    echo = json.loads(out.read_text())["config_echo"]
    assert echo["delta"] == 0.01 and echo["tau"] == 0.05
    assert echo["criterion"] == "vr" and echo["seed"] == 0


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tau": 0.2, "grace_period": 100}))
    out = tmp_path / "s.json"
    assert run_cli(["--synthetic", SYNTH, "--config", str(cfg), "--tau", "0.1",
                    "--rho-factors", "0.1,0.2", "--out-summary", str(out)]) == 0
    echo = json.loads(out.read_text())["config_echo"]
    assert echo["tau"] == 0.1 and echo["grace_period"] == 100 and echo["rho_factors"] == [0.1, 0.2]


def test_invalid_criterion_exits_2(capsys):
    assert run_cli(["--synthetic", SYNTH, "--criterion", "xx"]) == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["--synthetic", SYNTH, "--delta", "2"],
    ["--synthetic", SYNTH, "--rho-factors", "0.3,0.1"],
    ["--synthetic", SYNTH, "--bogus"],
    ["--input", "a.csv", "--synthetic", SYNTH],
    [],
    ["--synthetic", "{not json"],
    ["--synthetic", SYNTH, "--target", "y"],
])
def test_config_errors_exit_2(argv):
    assert run_cli(argv) == 2


def test_data_errors_exit_3(tmp_path):
    assert run_cli(["--input", str(tmp_path / "missing.csv")]) == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("a,y\n1,2\nx,3\n")
    assert run_cli(["--input", str(bad)]) == 3
    nominal = tmp_path / "n.arff"
    nominal.write_text("@relation r\n@attribute c {a,b}\n@attribute y numeric\n@data\na,1\n")
    assert run_cli(["--input", str(nominal)]) == 3


def test_csv_input_and_baselines(tmp_path):
    path = tmp_path / "fried.csv"
    src = make_fried(n=600, seed=2)
    write_csv(path, src, src.schema.features, "y")
    results = {}
    for baseline in ("none", "mean", "linear"):
        out = tmp_path / f"{baseline}.json"
        assert run_cli(["--input", str(path), "--baseline", baseline, "--out-summary", str(out)]) == 0
        results[baseline] = json.loads(out.read_text())
    assert results["mean"]["config_echo"]["learner"] == "mean"
    assert results["none"]["config_echo"]["source"] == "csv"


def test_no_timing_runs_are_byte_identical(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert run_cli(["--synthetic", SYNTH, "--no-timing", "--out-metrics", str(p),
                        "--out-summary", str(tmp_path / "s.json")]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


@pytest.mark.skipif(shutil.which("tsk-streams") is None, reason="console script not installed")
def test_console_script(tmp_path):
    out = subprocess.run(["tsk-streams", "--synthetic", SYNTH, "--baseline", "mean"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["rules"] == 0
