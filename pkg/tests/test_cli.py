"""Command-line interface: subcommands, exit codes, outputs."""
import json

import pytest

from fedchain.cli import main


@pytest.fixture()
def config_path(tmp_path):
    doc = {
        "seed": 3,
        "rounds": 4,
        "fairness_interval": 2,
        "dataset": {
            "n_clients": 3,
            "samples_per_client": [8, 8, 8],
            "dim": 3,
            "noise": 0.05,
            "behaviors": ["honest", "honest", "honest"],
        },
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    return path


def test_run_then_audit(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config_path), "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "complete" in printed

    assert main(["audit", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "ok" in printed


def test_run_writes_artifacts(config_path, tmp_path):
    out = tmp_path / "out"
    main(["run", "--config", str(config_path), "--out", str(out)])
    run_dirs = list(out.iterdir())
    assert len(run_dirs) == 1
    names = {p.name for p in run_dirs[0].iterdir()}
    assert {"report.json", "gas.csv", "rewards.csv", "ledger.bin", "attribution.jsonl", "blobs"} <= names


def test_gas_sweep_prints_csv(config_path, tmp_path, capsys):
    csv_out = tmp_path / "gas.csv"
    code = main([
        "gas-sweep", "--config", str(config_path), "--sizes", "10,100", "--out", str(csv_out),
    ])
    assert code == 0
    printed = capsys.readouterr().out
    assert printed.splitlines()[0] == "param_size,register,submit,aggregate,validate,distribute"
    assert csv_out.read_text() == printed


def test_config_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"seed": 1}))  # missing rounds/dataset
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_malformed_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_missing_config_file_exits_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path)]) == 2


def test_audit_without_run_exits_1(tmp_path, capsys):
    assert main(["audit", "--out", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_audit_detects_tamper_exits_1(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    main(["run", "--config", str(config_path), "--out", str(out)])
    run_dir = next(out.iterdir())
    blob = sorted((run_dir / "blobs").iterdir())[0]
    data = bytearray(blob.read_bytes())
    data[-1] ^= 0xFF
    blob.write_bytes(bytes(data))
    assert main(["audit", "--out", str(out)]) == 1


def test_bad_sizes_exits_2(config_path, tmp_path):
    assert main(["gas-sweep", "--config", str(config_path), "--sizes", "ten"]) == 2
