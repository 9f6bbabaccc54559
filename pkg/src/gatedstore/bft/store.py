"""Replica persistence: an append-only log with an in-memory index.

The log is the source of truth; the index rebuilds from it on restart.  A
file sink is optional -- the interface is the append/replay pair, not any
particular on-disk engine.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

from ..errors import CodecError
from ..model import AccessType


@dataclass(frozen=True)
class StoreEntry:
    h: bytes
    sigma: bytes
    at: AccessType
    epoch: int
    slot: int

    def encode(self) -> bytes:
        return (
            struct.pack(">32sBQI", self.h, self.at.value, self.epoch, self.slot)
            + struct.pack(">I", len(self.sigma))
            + self.sigma
        )

    @classmethod
    def decode(cls, raw: bytes) -> "StoreEntry":
        if len(raw) < 49:
            raise CodecError("store entry too short")
        h, at_b, epoch, slot = struct.unpack_from(">32sBQI", raw, 0)
        (n,) = struct.unpack_from(">I", raw, 45)
        sigma = raw[49 : 49 + n]
        if len(sigma) != n:
            raise CodecError("truncated store entry")
        return cls(h=h, sigma=sigma, at=AccessType.from_byte(at_b), epoch=epoch, slot=slot)


class StoreLog:
    """First committed value wins; identical re-commits are no-ops."""

    def __init__(self, path: str | Path | None = None):
        self.entries: list[StoreEntry] = []
        self._index: dict[bytes, StoreEntry] = {}
        self._path = Path(path) if path else None
        self._fh = self._path.open("ab") if self._path else None

    def __contains__(self, h: bytes) -> bool:
        return h in self._index

    def get(self, h: bytes) -> StoreEntry | None:
        return self._index.get(h)

    def append(self, entry: StoreEntry) -> bool:
        """Returns False when the key exists (idempotent re-commit)."""
        if entry.h in self._index:
            return False
        self.entries.append(entry)
        self._index[entry.h] = entry
        if self._fh:
            raw = entry.encode()
            self._fh.write(struct.pack(">I", len(raw)) + raw)
            self._fh.flush()
        return True

    def close(self) -> None:
        if self._fh:
            self._fh.close()
            self._fh = None

    @classmethod
    def replay(cls, path: str | Path) -> "StoreLog":
        """Rebuild the index by replaying the on-disk log."""
        log = cls()
        raw = Path(path).read_bytes()
        off = 0
        while off + 4 <= len(raw):
            (n,) = struct.unpack_from(">I", raw, off)
            off += 4
            log.append(StoreEntry.decode(raw[off : off + n]))
            off += n
        log._path = Path(path)
        log._fh = log._path.open("ab")
        return log
