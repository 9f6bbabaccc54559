"""Simulated permissioned ledger: an append-only, hash-chained block log.

Each submitted record lands in its own block; the block hash covers the
previous block's hash and the record bytes, so any mutation of history is
detectable by walking to genesis.  Transaction ids are position-salted
record digests: identical content submitted twice yields distinct ids.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

from .crypto.aead import sha256
from .errors import CodecError, GatedStoreError, NotFound
from .model import AccessType
from .bft import messages as M


@dataclass(frozen=True)
class OnChainRecord:
    at: AccessType
    c_h: bytes
    c_p: bytes
    owner_id: str
    timestamp: int  # logical clock supplied by the submitter's context

    def encode(self) -> bytes:
        owner = self.owner_id.encode("utf-8")
        return b"".join(
            [
                self.at.to_byte(),
                struct.pack(">I", len(self.c_h)),
                self.c_h,
                struct.pack(">I", len(self.c_p)),
                self.c_p,
                struct.pack(">H", len(owner)),
                owner,
                struct.pack(">Q", self.timestamp),
            ]
        )

    @classmethod
    def decode(cls, raw: bytes) -> "OnChainRecord":
        try:
            at = AccessType.from_byte(raw[0])
            off = 1
            (n,) = struct.unpack_from(">I", raw, off)
            off += 4
            c_h = raw[off : off + n]
            off += n
            (n,) = struct.unpack_from(">I", raw, off)
            off += 4
            c_p = raw[off : off + n]
            off += n
            (n,) = struct.unpack_from(">H", raw, off)
            off += 2
            owner = raw[off : off + n].decode("utf-8")
            off += n
            (ts,) = struct.unpack_from(">Q", raw, off)
            off += 8
            if off != len(raw):
                raise CodecError("trailing bytes in record")
        except (IndexError, struct.error, UnicodeDecodeError):
            raise CodecError("malformed on-chain record")
        return cls(at=at, c_h=c_h, c_p=c_p, owner_id=owner, timestamp=ts)


@dataclass(frozen=True)
class Block:
    prev_hash: bytes
    record: bytes
    block_hash: bytes


GENESIS = sha256(b"genesis")


class Chain:
    """Single-writer append-only chain with lock-free snapshot reads."""

    def __init__(self, path: str | Path | None = None):
        self.blocks: list[Block] = []
        self._by_txid: dict[str, OnChainRecord] = {}
        self.registered_owners: set[str] = set()
        self._path = Path(path) if path else None
        self._fh = self._path.open("ab") if self._path else None

    def register_owner(self, owner_id: str) -> None:
        self.registered_owners.add(owner_id)

    def _tip(self) -> bytes:
        return self.blocks[-1].block_hash if self.blocks else GENESIS

    def submit(self, record: OnChainRecord) -> str:
        if record.owner_id not in self.registered_owners:
            raise GatedStoreError(f"owner {record.owner_id!r} is not registered")
        raw = record.encode()
        position = len(self.blocks)
        txid = sha256(raw + struct.pack(">Q", position)).hex()
        block_hash = sha256(self._tip() + raw)
        block = Block(prev_hash=self._tip(), record=raw, block_hash=block_hash)
        self.blocks.append(block)
        self._by_txid[txid] = record
        if self._fh:
            self._fh.write(struct.pack(">I", len(raw)) + raw)
            self._fh.flush()
        return txid

    def fetch(self, txid: str) -> OnChainRecord:
        rec = self._by_txid.get(txid)
        if rec is None:
            raise NotFound(f"unknown txid {txid}")
        return rec

    def verify(self) -> bool:
        prev = GENESIS
        for block in self.blocks:
            if block.prev_hash != prev:
                return False
            if sha256(block.prev_hash + block.record) != block.block_hash:
                return False
            prev = block.block_hash
        return True

    def close(self) -> None:
        if self._fh:
            self._fh.close()
            self._fh = None

    @classmethod
    def replay(cls, path: str | Path, registered_owners: set[str]) -> "Chain":
        chain = cls()
        chain.registered_owners = set(registered_owners)
        raw = Path(path).read_bytes()
        off = 0
        while off + 4 <= len(raw):
            (n,) = struct.unpack_from(">I", raw, off)
            off += 4
            chain.submit(OnChainRecord.decode(raw[off : off + n]))
            off += n
        chain._path = Path(path)
        chain._fh = chain._path.open("ab")
        return chain


class LedgerNode:
    """Message-facing adapter around :class:`Chain`."""

    def __init__(self, chain: Chain | None = None):
        self.chain = chain or Chain()

    def on_message(self, sender: str, msg: M.Message, api) -> None:
        if isinstance(msg, M.LedgerSubmit):
            try:
                record = OnChainRecord.decode(msg.record)
                if record.owner_id != sender:
                    raise GatedStoreError("record owner does not match channel sender")
                txid = self.chain.submit(record)
            except (CodecError, GatedStoreError) as exc:
                api.trace("ledger_rejected", sender=sender, reason=str(exc))
                api.send(sender, M.LedgerTxid(ref=msg.ref, txid=""))
                return
            api.trace("ledger_submit", txid=txid, owner=sender, at=record.at.value)
            api.send(sender, M.LedgerTxid(ref=msg.ref, txid=txid))
        elif isinstance(msg, M.LedgerFetch):
            try:
                rec = self.chain.fetch(msg.txid)
                api.send(sender, M.LedgerRecord(txid=msg.txid, found=1, record=rec.encode()))
            except NotFound:
                api.send(sender, M.LedgerRecord(txid=msg.txid, found=0, record=b""))
        elif isinstance(msg, M.LedgerPolicyPull):
            try:
                rec = self.chain.fetch(msg.txid)
                api.send(
                    sender,
                    M.LedgerPolicy(
                        txid=msg.txid,
                        requester=msg.requester,
                        found=1,
                        at=rec.at.value,
                        c_p=rec.c_p,
                    ),
                )
            except NotFound:
                api.send(
                    sender,
                    M.LedgerPolicy(txid=msg.txid, requester=msg.requester, found=0, at=0, c_p=b""),
                )
