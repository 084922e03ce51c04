import json
import os
import subprocess
import sys

import pytest
import yaml

from quarticbath.cli import run


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_classify_prints_case_and_equilibria(tmp_path, capsys):
    out = str(tmp_path / "c")
    rc = run(["classify", "--alpha", "1", "--beta", "1", "--omega", "1",
              "--epsilon", "0.5", "--output", out])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "II"
    assert len(lines) == 4  # origin plus the two wells
    assert "saddle-centre" in lines[1]
    for name in ("classify.json", "manifest.json", "config.yaml"):
        assert os.path.exists(os.path.join(out, name))
    with open(os.path.join(out, "classify.json")) as fh:
        rep = json.load(fh)
    assert rep["case"] == "II"
    assert len(rep["equilibria"]) == 3


def test_unknown_config_key_is_a_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("alfa: 1.0\n")
    rc = run(["classify", "--config", str(cfg),
              "--output", str(tmp_path / "o")])
    assert rc == 2
    assert "unknown config key" in capsys.readouterr().err


def test_invalid_values_are_config_errors(tmp_path, capsys):
    assert run(["classify", "--workers", "0",
                "--output", str(tmp_path / "a")]) == 2
    assert run(["classify", "--omega", "-1",
                "--output", str(tmp_path / "b")]) == 2
    # malformed inline lists surface as configuration errors too
    assert run(["contours", "--window", "1,2",
                "--output", str(tmp_path / "d")]) == 2
    err = capsys.readouterr().err
    assert "configuration error" in err


def test_numeric_failure_writes_machine_readable_report(tmp_path, capsys):
    out = str(tmp_path / "n")
    # an orbit below the saddle energy cannot exist
    rc = run(["upo", "--delta-e", "-0.05", "--output", out])
    assert rc == 3
    captured = capsys.readouterr()
    report = json.loads(captured.err.strip().splitlines()[-1])
    assert report["error"]["type"] == "WrongRegime"
    assert report["error"]["command"] == "upo"
    with open(os.path.join(out, "error.json")) as fh:
        assert json.load(fh) == report


def test_flag_beats_file_beats_default(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("alpha: 2.0\nseed: 9\n")
    out = str(tmp_path / "p")
    rc = run(["classify", "--config", str(cfg), "--alpha", "3.0",
              "--output", out])
    assert rc == 0
    with open(os.path.join(out, "manifest.json")) as fh:
        conf = json.load(fh)["config"]
    assert conf["alpha"] == 3.0   # flag wins
    assert conf["seed"] == 9      # file beats default
    assert conf["beta"] == 1.0    # untouched default


def test_embedded_config_replays_byte_for_byte(tmp_path):
    first = str(tmp_path / "r1")
    rc = run(["flux", "--delta-e-list", "0.01,0.05", "--epsilon-list",
              "0.0,0.3", "--epsilon", "0.3", "--n-samples", "128",
              "--output", first])
    assert rc == 0
    second = str(tmp_path / "r2")
    rc = run(["flux", "--config", os.path.join(first, "config.yaml"),
              "--output", second])
    assert rc == 0
    assert _read(os.path.join(first, "flux.csv")) == _read(
        os.path.join(second, "flux.csv"))
    assert _read(os.path.join(first, "config.yaml")) != b""


def test_rerun_with_same_flags_is_byte_identical(tmp_path):
    a = str(tmp_path / "a")
    b = str(tmp_path / "b")
    args = ["gaptime", "--epsilon", "0.5", "--delta-e", "0.05", "--n", "16",
            "--cutoff", "5", "--n-samples", "64"]
    assert run(args + ["--output", a]) == 0
    assert run(args + ["--output", b]) == 0
    assert _read(os.path.join(a, "gap.csv")) == _read(
        os.path.join(b, "gap.csv"))
    # embedded configs agree on everything but the output path itself
    with open(os.path.join(a, "config.yaml")) as fh:
        ca = yaml.safe_load(fh)
    with open(os.path.join(b, "config.yaml")) as fh:
        cb = yaml.safe_load(fh)
    ca.pop("output"), cb.pop("output")
    assert ca == cb


def test_worker_fanout_does_not_change_results(tmp_path):
    base = ["gaptime", "--epsilon", "0.5", "--delta-e", "0.05", "--n", "12",
            "--cutoff", "5", "--n-samples", "64"]
    one = str(tmp_path / "w1")
    three = str(tmp_path / "w3")
    assert run(base + ["--workers", "1", "--output", one]) == 0
    assert run(base + ["--workers", "3", "--output", three]) == 0
    assert _read(os.path.join(one, "gap.csv")) == _read(
        os.path.join(three, "gap.csv"))


def test_manifest_records_the_run(tmp_path):
    out = str(tmp_path / "m")
    assert run(["classify", "--output", out]) == 0
    with open(os.path.join(out, "manifest.json")) as fh:
        man = json.load(fh)
    assert man["command"] == "classify"
    assert man["artifacts"] == ["classify.json", "config.yaml"]
    assert man["wall_time_s"] >= 0.0
    assert "version" in man
    # the embedded config is the full effective option set
    with open(os.path.join(out, "config.yaml")) as fh:
        cfg = yaml.safe_load(fh)
    assert cfg == man["config"]


def test_poincare_manifest_reports_excess_energy(tmp_path):
    out = str(tmp_path / "pc")
    rc = run(["poincare", "--energy", "0.05", "--n", "4", "--n-hits", "2",
              "--t-max", "30", "--epsilon", "0.5",
              "--region=-0.3,0.3,-0.3,0.3", "--output", out])
    assert rc == 0
    with open(os.path.join(out, "poincare.json")) as fh:
        meta = json.load(fh)
    assert meta["delta_E"] == pytest.approx(0.05)


def test_version_flag_reports_and_exits():
    with pytest.raises(SystemExit) as exc:
        run(["--version"])
    assert exc.value.code == 0


def test_console_entry_point_works(tmp_path):
    out = str(tmp_path / "sub")
    proc = subprocess.run(
        [sys.executable, "-c",
         "from quarticbath.cli import main; main()",
         "classify", "--alpha", "0.2", "--beta", "-1", "--omega", "1",
         "--epsilon", "0.4", "--output", out],
        capture_output=True, text=True)
    # argv[0] is the -c script; argparse sees the rest
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip().splitlines()[0] == "III"
