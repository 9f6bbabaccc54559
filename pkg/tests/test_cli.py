import json

import pytest

from gatedstore.cli import main


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(
        [
            "run",
            "--writes", "4",
            "--clients", "4",
            "--access", "be",
            "--reads", "honest+denied",
            "--seed", "3",
            "--out", str(out),
        ]
    )
    assert rc == 0
    printed = capsys.readouterr().out
    assert "PASS  agreement_total_order" in printed
    for name in (
        "config.json",
        "trace.ndjson",
        "trace_hash.txt",
        "verdicts.json",
        "metrics.json",
        "audit.ndjson",
        "epochs.csv",
        "phases.csv",
        "phase_latency.png",
        "epoch_profile.png",
    ):
        assert (out / name).exists(), name
    verdicts = json.loads((out / "verdicts.json").read_text())
    assert all(v["passed"] for v in verdicts)
    header = (out / "epochs.csv").read_text().splitlines()[0]
    assert header == "replica,epoch,txs,latency_ticks"


def test_replay_matches(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(
        ["run", "--writes", "2", "--clients", "4", "--access", "be", "--seed", "5", "--out", str(out)]
    ) == 0
    capsys.readouterr()
    assert main(["replay", str(out)]) == 0
    assert "traces identical" in capsys.readouterr().out


def test_replay_detects_config_drift(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(
        ["run", "--writes", "2", "--clients", "4", "--access", "be", "--seed", "5", "--out", str(out)]
    ) == 0
    # tamper with the recorded hash
    (out / "trace_hash.txt").write_text("0" * 64 + "\n")
    assert main(["replay", str(out)]) == 1


def test_env_override(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("GATEDSTORE_SEED", "77")
    out = tmp_path / "run"
    assert main(["run", "--writes", "2", "--clients", "4", "--access", "be", "--out", str(out)]) == 0
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["seed"] == 77


def test_bench_artifacts(tmp_path, capsys):
    out = tmp_path / "bench"
    rc = main(["bench", "--reps", "3", "--out", str(out)])
    assert rc == 0
    printed = capsys.readouterr().out
    assert "encryption ordering BE < TE < ABE: holds" in printed
    assert (out / "bench.json").exists()
    assert (out / "bench.csv").exists()
    assert (out / "bench_latency.png").exists()
    rows = (out / "bench.csv").read_text().splitlines()
    assert rows[0] == "scheme,phase,mean_ms,min_ms,max_ms,stdev_ms"
    assert len(rows) == 7


def test_adversarial_run_passes(tmp_path):
    rc = main(
        [
            "run",
            "--writes", "4",
            "--clients", "4",
            "--access", "te",
            "--adversary", "crash:3@0",
            "--seed", "9",
        ]
    )
    assert rc == 0
