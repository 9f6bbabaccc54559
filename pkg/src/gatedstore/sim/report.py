"""Figure rendering for run and bench reports.

Uses the Agg backend so figures render headlessly to files, next to the
delimited metric outputs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

WRITE_PHASES = [
    ("encryption_ms", "client encryption (ms)"),
    ("offchain_consensus_storage_ticks", "off-chain consensus + storage (ticks)"),
    ("onchain_ticks", "on-chain anchor (ticks)"),
]
READ_PHASES = [
    ("onchain_fetch_ticks", "on-chain fetch (ticks)"),
    ("verification_key_release_ticks", "verification + key release (ticks)"),
    ("offchain_read_ticks", "off-chain read (ticks)"),
    ("decryption_ms", "client decryption (ms)"),
]


def phase_latency_figure(metrics: dict, path: str | Path) -> Path:
    """Stacked per-phase mean latency for the write and read pipelines."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    for ax, (title, phases, group) in zip(
        axes,
        [("write pipeline", WRITE_PHASES, "write_phases"), ("read pipeline", READ_PHASES, "read_phases")],
    ):
        labels, means = [], []
        for key, label in phases:
            stats = metrics[group][key]
            labels.append(label)
            means.append(stats["mean"] or 0.0)
        ax.barh(range(len(labels)), means, color="#3893b8")
        ax.set_yticks(range(len(labels)))
        ax.set_yticklabels(labels, fontsize=7)
        ax.set_xlabel("mean latency")
        ax.set_title(title, fontsize=9)
        ax.invert_yaxis()
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=130)
    plt.close(fig)
    return out


def epoch_throughput_figure(metrics: dict, path: str | Path) -> Path:
    """Per-epoch committed transactions and commit latency."""
    rows = [r for r in metrics["epochs"] if r["replica"] == "replica-0"]
    fig, ax1 = plt.subplots(figsize=(6.5, 3.2))
    if rows:
        epochs = [r["epoch"] for r in rows]
        ax1.bar(epochs, [r["txs"] for r in rows], color="#aadda5", label="committed txs")
        ax2 = ax1.twinx()
        ax2.plot(
            epochs, [r["latency_ticks"] for r in rows], color="#a30141", marker="o",
            markersize=3, linewidth=1, label="commit latency",
        )
        ax2.set_ylabel("latency (ticks)")
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("transactions")
    ax1.set_title("epoch commit profile (replica-0)", fontsize=9)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=130)
    plt.close(fig)
    return out


def bench_latency_figure(bench: dict, path: str | Path) -> Path:
    """Per-scheme encryption/decryption wall latency, log scale."""
    schemes = ["abe", "be", "te"]
    enc = [bench["schemes"][s]["encrypt_ms"]["mean"] for s in schemes]
    dec = [bench["schemes"][s]["decrypt_ms"]["mean"] for s in schemes]
    x = range(len(schemes))
    width = 0.38
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    ax.bar([i - width / 2 for i in x], enc, width, label="encryption", color="#a30141")
    ax.bar([i + width / 2 for i in x], dec, width, label="decryption", color="#fcca78")
    ax.set_yscale("log")
    ax.set_xticks(list(x))
    ax.set_xticklabels([s.upper() for s in schemes])
    ax.set_ylabel("latency (ms)")
    ax.set_title(f"access-control latency, {bench['payload_size']}-byte payload", fontsize=9)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=130)
    plt.close(fig)
    return out
