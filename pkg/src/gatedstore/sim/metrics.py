"""Metrics extraction: per-epoch commit records and per-phase latency.

Network-bound phases are measured in logical ticks (the simulated clock);
client-side cryptography is measured in wall-clock milliseconds because it
runs outside simulated time.  Units are explicit in every record.
"""

from __future__ import annotations

import csv
from pathlib import Path


def _percentiles(values: list[float]) -> dict:
    if not values:
        return {"count": 0, "mean": None, "p50": None, "p90": None, "p99": None}
    vs = sorted(values)

    def pct(p: float) -> float:
        idx = min(len(vs) - 1, max(0, round(p * (len(vs) - 1))))
        return vs[idx]

    return {
        "count": len(vs),
        "mean": sum(vs) / len(vs),
        "p50": pct(0.50),
        "p90": pct(0.90),
        "p99": pct(0.99),
    }


def collect(system) -> dict:
    epoch_records = []
    for ev in system.net.trace:
        if ev.kind == "epoch_commit":
            fields = dict(f.split("=", 1) for f in ev.info.split(","))
            started = int(fields["started_at"])
            epoch_records.append(
                {
                    "replica": ev.sender,
                    "epoch": int(fields["epoch"]),
                    "txs": int(fields["txs"]),
                    "latency_ticks": ev.t - started,
                }
            )

    enc_ms, consensus_ticks, onchain_ticks = [], [], []
    for owner in system.owners.values():
        for sess in owner.sessions.values():
            enc_ms.append(sess.enc_wall_s * 1000)
            if sess.t_acked is not None:
                consensus_ticks.append(sess.t_acked - sess.t_start)
            if sess.t_txid is not None and sess.t_acked is not None:
                onchain_ticks.append(sess.t_txid - sess.t_acked)

    fetch_ticks, gate_ticks, read_ticks, dec_ms = [], [], [], []
    for node in system.requesters.values():
        for sess in node.sessions.values():
            if sess.t_record is not None:
                fetch_ticks.append(sess.t_record - sess.t_start)
            if sess.t_key is not None and sess.t_record is not None:
                gate_ticks.append(sess.t_key - sess.t_record)
            if sess.t_delivered is not None and sess.t_key is not None:
                read_ticks.append(sess.t_delivered - sess.t_key)
                dec_ms.append(sess.dec_wall_s * 1000)

    commits = [r for r in epoch_records if r["txs"] > 0]
    return {
        "epochs": epoch_records,
        "write_phases": {
            "encryption_ms": _percentiles(enc_ms),
            "offchain_consensus_storage_ticks": _percentiles(consensus_ticks),
            "onchain_ticks": _percentiles(onchain_ticks),
        },
        "read_phases": {
            "onchain_fetch_ticks": _percentiles(fetch_ticks),
            "verification_key_release_ticks": _percentiles(gate_ticks),
            "offchain_read_ticks": _percentiles(read_ticks),
            "decryption_ms": _percentiles(dec_ms),
        },
        "epoch_commit_latency_ticks": _percentiles([r["latency_ticks"] for r in commits]),
        "epoch_throughput_txs": _percentiles([float(r["txs"]) for r in commits]),
        "total_steps": system.net.steps,
        "final_time": system.net.now,
    }


def write_epoch_csv(metrics: dict, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["replica", "epoch", "txs", "latency_ticks"])
        writer.writeheader()
        for row in metrics["epochs"]:
            writer.writerow(row)


def write_phase_csv(metrics: dict, path: str | Path) -> None:
    rows = []
    for group in ("write_phases", "read_phases"):
        for phase, stats in metrics[group].items():
            rows.append({"group": group, "phase": phase, **stats})
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["group", "phase", "count", "mean", "p50", "p90", "p99"]
        )
        writer.writeheader()
        writer.writerows(rows)
