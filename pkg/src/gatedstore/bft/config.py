"""Replica-side configuration."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import GatedStoreError


@dataclass(frozen=True)
class ReplicaConfig:
    n: int = 4
    f: int = 1
    replica_id: int = 0
    batch_cap: int = 40  # B: max transactions per epoch across all replicas
    coded_threshold: int = 64 * 1024
    listen_addresses: tuple[str, ...] = ()
    key_files: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.f > (self.n - 1) // 3:
            raise GatedStoreError(f"f={self.f} exceeds floor((n-1)/3) for n={self.n}")
        if not 0 <= self.replica_id < self.n:
            raise GatedStoreError("replica_id out of range")
        if self.batch_cap < 1:
            raise GatedStoreError("batch cap must be positive")

    @property
    def per_replica_batch(self) -> int:
        return math.ceil(self.batch_cap / self.n)

    @classmethod
    def from_file(cls, path: str | Path, replica_id: int) -> "ReplicaConfig":
        raw = json.loads(Path(path).read_text())
        return cls(
            n=raw["n"],
            f=raw["f"],
            replica_id=replica_id,
            batch_cap=raw.get("B", 40),
            coded_threshold=raw.get("coded_threshold", 64 * 1024),
            listen_addresses=tuple(raw.get("listen_addresses", ())),
            key_files=dict(raw.get("key_files", {})),
        )


def default_cluster(f: int = 1, batch_cap: int = 40) -> list[ReplicaConfig]:
    n = 3 * f + 1
    return [ReplicaConfig(n=n, f=f, replica_id=i, batch_cap=batch_cap) for i in range(n)]
