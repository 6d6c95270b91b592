import csv
import json
import shutil
import subprocess
import sys

import pytest

from rpmlink.cli import run_cli
from rpmlink.temporal_graph import load_edge_list

FAST = ["--epochs", "3", "--folds", "3", "--repeats", "2"]


@pytest.fixture(scope="module")
def synth_net(tmp_path_factory):
    path = tmp_path_factory.mktemp("net") / "synth.txt"
    code = run_cli(["synth", "--num-nodes", "40", "--num-snapshots", "8", "--base-rate", "0.5",
                    "--seed", "3", "--output", str(path)])
    assert code == 0
    return path


def test_synth_writes_echo(synth_net):
    echo = json.loads(synth_net.with_name("synth.txt.config.json").read_text())
    assert echo["command"] == "synth" and echo["num_nodes"] == 40 and echo["seed"] == 3
    assert load_edge_list(synth_net).num_snapshots == 8


def test_stats(synth_net, tmp_path, capsys):
    assert run_cli(["stats", "--input", str(synth_net)]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert [int(r["t"]) for r in rows] == list(range(1, 9))
    assert all(int(r["added"]) > 0 for r in rows)
    out = tmp_path / "stats.csv"
    assert run_cli(["stats", "--input", str(synth_net), "--output", str(out)]) == 0
    assert out.read_text().startswith("t,added,dropped\n")


def test_compare_report_shape(synth_net, tmp_path):
    out = tmp_path / "cmp"
    assert run_cli(["compare", "--input", str(synth_net), "-n", "3", "--output", str(out), *FAST]) == 0
    report = json.loads((tmp_path / "cmp.json").read_text())
    assert len(report["methods"]) == 7
    assert len(report["t_tests"]) == 6
    rows = list(csv.DictReader(open(tmp_path / "cmp.csv")))
    assert [r["method"] for r in rows][:3] == ["RPM", "Supervised-MA", "Supervised"]


def test_compare_from_config_file(synth_net, tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"input": str(synth_net), "frames": 3, "folds": 2, "repeats": 1,
                               "classifier": {"epochs": 2}, "output": str(tmp_path / "r")}))
    assert run_cli(["compare", "--config", str(cfg)]) == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert len(report["methods"]) == 7 and len(report["t_tests"]) == 6
    assert report["config"]["classifier"]["epochs"] == 2
    assert report["config"]["classifier"]["C"] == 1.0


def test_evaluate_defaults_to_rpm(synth_net, tmp_path):
    out = tmp_path / "ev"
    assert run_cli(["evaluate", "--input", str(synth_net), "-n", "3", "--output", str(out), *FAST]) == 0
    assert list(json.loads((tmp_path / "ev.json").read_text())["methods"]) == ["RPM"]


def _files(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir()) if p.is_file()}


def test_echoed_config_reproduces_bitwise(synth_net, tmp_path):
    run_dir = tmp_path / "run"
    run_dir.mkdir()
    out = run_dir / "cmp"
    args = ["compare", "--input", str(synth_net), "-n", "3", "--model", "auto", "--seed", "7",
            "--threads", "2", "--output", str(out), *FAST]
    assert run_cli(args) == 0
    first = _files(run_dir)
    assert {"cmp.json", "cmp.csv", "cmp.config.json"} <= set(first)
    saved = tmp_path / "cmp.config.json"
    shutil.copy(run_dir / "cmp.config.json", saved)
    shutil.rmtree(run_dir)
    run_dir.mkdir()
    assert run_cli(["compare", "--config", str(saved)]) == 0
    assert _files(run_dir) == first


def test_featurize_and_train_reproduce(synth_net, tmp_path):
    feat = tmp_path / "pairs.csv"
    assert run_cli(["featurize", "--input", str(synth_net), "-n", "3", "--output", str(feat)]) == 0
    rows = list(csv.reader(open(feat)))
    assert len(rows) == 1 + 40 * 40
    assert rows[0][-2:] == ["rate_src", "rate_dst"]
    schema = json.loads(feat.with_name("pairs.csv.schema.json").read_text())
    assert schema["rows"] == 1600

    before = feat.read_bytes()
    assert run_cli(["featurize", "--config", str(feat) + ".config.json"]) == 0
    assert feat.read_bytes() == before

    model = tmp_path / "model.json"
    assert run_cli(["train", "--input", str(synth_net), "-n", "3", "--epochs", "3",
                    "--output", str(model)]) == 0
    saved = json.loads(model.read_text())
    assert saved["schema"] == schema["features"]
    before = model.read_bytes()
    assert run_cli(["train", "--config", str(model) + ".config.json"]) == 0
    assert model.read_bytes() == before


def test_featurize_scores_only(synth_net, tmp_path):
    out = tmp_path / "scores.csv"
    assert run_cli(["featurize", "--input", str(synth_net), "-n", "3", "--scores-only",
                    "--output", str(out)]) == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["src", "dst", "cn", "jc", "pa", "aa"]
    assert len(rows) == 1 + 1600


@pytest.mark.parametrize("argv", [
    ["train", "--output", "m.json"],
    ["frobnicate"],
    [],
    ["compare", "--input", "x.txt", "--folds", "1"],
    ["compare", "--input", "x.txt", "--methods", "RPM,katz"],
])
def test_usage_errors(argv, capsys):
    assert run_cli(argv) == 1
    assert capsys.readouterr().err


def test_config_field_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"input": "x.txt", "windw": 2}))
    assert run_cli(["compare", "--config", str(cfg)]) == 1
    assert "windw" in capsys.readouterr().err


def test_runtime_failures(synth_net, tmp_path, capsys):
    assert run_cli(["stats", "--input", str(tmp_path / "missing.txt")]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("a b 1\nc d nope\n")
    assert run_cli(["stats", "--input", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err
    # 8 snapshots cannot hold a target frame at 9
    assert run_cli(["compare", "--input", str(synth_net), "-n", "8", *FAST]) == 2


def test_console_script(synth_net):
    exe = shutil.which("rpmlink")
    cmd = [exe] if exe else [sys.executable, "-m", "rpmlink.cli"]
    done = subprocess.run([*cmd, "stats", "--input", str(synth_net)], capture_output=True, text=True)
    assert done.returncode == 0
    assert done.stdout.splitlines()[0] == "t,added,dropped"
