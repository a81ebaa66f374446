import json
import subprocess
import sys

import pytest

from driftbench.cli import main
from driftbench.data import ingest, write_csv


@pytest.fixture(scope="module")
def stream(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    path = d / "stream.csv"
    rc = main(["generate", "--out", str(path), "--pattern", "recurring", "--n-windows", "12", "--samples-per-window", "300",
               "--n-features", "4", "--n-classes", "4", "--drift-classes", "2", "--drift-at", "3", "--period", "20",
               "--seed", "2"])
    assert rc == 0
    return path


@pytest.fixture(scope="module")
def log_path(stream):
    out = stream.with_name("log.json")
    rc = main(["benchmark", "--data", str(stream), "--out", str(out), "--time-col", "timestamp", "--train-windows", "3",
               "--trees", "10", "--severity-threshold", "0.5"])
    assert rc == 0
    return out


def test_generate_writes_scenario(stream):
    scenario = json.loads(stream.with_name("stream.scenario.json").read_text())
    assert scenario["pattern"] == "recurring" and scenario["seed"] == 2
    assert len(ingest(stream, "label", "timestamp")) == 3600


def test_missing_required_flag_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["generate"])
    assert exc.value.code == 1


def test_config_echoed_to_stderr(log_path, capsys, tmp_path):
    main(["generate", "--out", str(tmp_path / "x.csv"), "--pattern", "none", "--n-windows", "2",
          "--samples-per-window", "10", "--n-features", "2", "--n-classes", "2"])
    err = capsys.readouterr().err
    echoed = json.loads(err.strip().splitlines()[0])
    assert echoed["command"] == "generate" and echoed["config"]["pattern"] == "none"


def test_benchmark_log(log_path):
    log = json.loads(log_path.read_text())
    assert len(log["rows"]) == 9
    assert log["header"]["config"]["drift"]["alpha"] == 0.05


@pytest.mark.parametrize(
    "extra",
    [
        ["--window-by", "time:1d", "--window-by", "count:100"],
        ["--window-by", "time:1d"],  # no --time-col
        ["--window-by", "fortnight"],
        ["--alpha", "2"],
    ],
)
def test_benchmark_usage_errors(stream, tmp_path, extra):
    rc = main(["benchmark", "--data", str(stream), "--out", str(tmp_path / "l.json"), *extra])
    assert rc == 1


def test_benchmark_data_errors(tmp_path):
    assert main(["benchmark", "--data", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "l.json"),
                 "--window-by", "count:10"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("f1,label\n1,a\nnan,b\n")
    assert main(["benchmark", "--data", str(bad), "--out", str(tmp_path / "l.json"), "--window-by", "count:1"]) == 2


def test_count_windows(stream, tmp_path):
    out = tmp_path / "l.json"
    assert main(["benchmark", "--data", str(stream), "--out", str(out), "--window-by", "count:600", "--trees", "5",
                 "--time-col", "timestamp", "--train-windows", "2", "--no-per-class"]) == 0
    rows = json.loads(out.read_text())["rows"]
    assert len(rows) == 4 and "per_class_ref" not in rows[0]
    # fewer windows than training windows is a data error
    assert main(["benchmark", "--data", str(stream), "--out", str(out), "--window-by", "count:600",
                 "--time-col", "timestamp"]) == 2


def test_report(log_path, tmp_path):
    out = tmp_path / "report"
    assert main(["report", "--log", str(log_path), "--out-dir", str(out), "--top-k", "2"]) == 0
    assert (out / "summary.json").exists() and (out / "global.svg").exists()
    assert len(list(out.glob("class_*.svg"))) == 2
    assert main(["report", "--log", str(tmp_path / "nope.json"), "--out-dir", str(out)]) == 2


def test_detect(stream, tmp_path, capsys):
    data = ingest(stream, "label", "timestamp")
    write_csv(data.take(slice(0, 300)), tmp_path / "a.csv")
    write_csv(data.take(slice(0, 300)), tmp_path / "b.csv")
    capsys.readouterr()
    rc = main(["detect", "--ref", str(tmp_path / "a.csv"), "--cur", str(tmp_path / "b.csv"), "--label-col", "label",
               "--time-col", "timestamp", "--per-class"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["overall_severity"] == 0.0 and not report["drifted"]
    assert set(report["per_class"]) == {"c0", "c1", "c2", "c3"}
    weights = tmp_path / "w.json"
    weights.write_text('{"f1": 1, "f2": 0, "f3": 0, "f4": 0, "label": 0}')
    rc = main(["detect", "--ref", str(tmp_path / "a.csv"), "--cur", str(tmp_path / "b.csv"), "--label-col", "label",
               "--time-col", "timestamp", "--weights", str(weights)])
    assert rc == 2
    assert main(["detect", "--ref", "a", "--cur", "b", "--per-class"]) == 1


def test_split_partitions_input(stream, log_path, tmp_path):
    prefix = tmp_path / "part"
    assert main(["split", "--log", str(log_path), "--data", str(stream), "--out-prefix", str(prefix),
                 "--min-drifts", "3", "--time-col", "timestamp"]) == 0
    hot = ingest(f"{prefix}_drifted.csv", "label", "timestamp")
    stable = ingest(f"{prefix}_stable.csv", "label", "timestamp")
    assert set(hot.classes) == {"c0", "c1"}
    assert set(stable.classes) == {"c2", "c3"}
    assert len(hot) + len(stable) == 3600


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "driftbench", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "benchmark" in proc.stdout
    help_text = subprocess.run([sys.executable, "-m", "driftbench", "benchmark", "--help"], capture_output=True,
                               text=True).stdout
    assert "default: 0.05" in help_text and "default: 7" in help_text
