"""Storage replica: epoch engine, local persistence, quorum read path.

Each epoch runs n parallel broadcast instances (one proposer each) and n
binary-agreement instances deciding which proposals commit.  Epochs start
lazily -- a replica proposes when it has buffered transactions and joins an
epoch when it first sees traffic for it -- and commit strictly in order,
so every correct replica applies the same deterministic sequence:
agreement indices ascending, proposal order within a batch, duplicates and
invalid origin tags skipped identically everywhere.

The replica itself implements only honest behavior; faults are injected at
the network layer.
"""

from __future__ import annotations

import hmac
import struct
from dataclasses import dataclass
from hashlib import sha256 as _sha256

from ..errors import CodecError, GatedStoreError, LabelMismatch
from ..model import AccessType, CipherBundle
from ..crypto.te import TeSecretShare, te_share_dec, TeCiphertext
from . import messages as M
from .aba import AbaInstance
from .config import ReplicaConfig
from .rbc import Bcast, RbcInstance, Send
from .store import StoreEntry, StoreLog


@dataclass(frozen=True)
class Tx:
    h: bytes
    sigma: bytes
    origin: str
    mac: bytes


def owner_mac(key: bytes, h: bytes, sigma: bytes) -> bytes:
    return hmac.new(key, h + sigma, _sha256).digest()


def encode_batch(txs: list[Tx]) -> bytes:
    out = [struct.pack(">H", len(txs))]
    for tx in txs:
        origin = tx.origin.encode("utf-8")
        out.append(struct.pack(">32sI", tx.h, len(tx.sigma)))
        out.append(tx.sigma)
        out.append(struct.pack(">H", len(origin)))
        out.append(origin)
        out.append(struct.pack(">H", len(tx.mac)))
        out.append(tx.mac)
    return b"".join(out)


def decode_batch(raw: bytes) -> list[Tx]:
    (count,) = struct.unpack_from(">H", raw, 0)
    off = 2
    txs = []
    try:
        for _ in range(count):
            h, slen = struct.unpack_from(">32sI", raw, off)
            off += 36
            sigma = raw[off : off + slen]
            if len(sigma) != slen:
                raise CodecError("truncated sigma")
            off += slen
            (olen,) = struct.unpack_from(">H", raw, off)
            off += 2
            origin = raw[off : off + olen].decode("utf-8")
            off += olen
            (mlen,) = struct.unpack_from(">H", raw, off)
            off += 2
            mac = raw[off : off + mlen]
            off += mlen
            txs.append(Tx(h=h, sigma=sigma, origin=origin, mac=mac))
    except (struct.error, UnicodeDecodeError):
        raise CodecError("malformed batch")
    if off != len(raw):
        raise CodecError("trailing bytes in batch")
    return txs


class _EpochState:
    __slots__ = ("rbc", "aba", "proposals", "started", "committed", "zero_filled")

    def __init__(self):
        self.rbc: dict[int, RbcInstance] = {}
        self.aba: dict[int, AbaInstance] = {}
        self.proposals: dict[int, bytes] = {}
        self.started = False
        self.committed = False
        self.zero_filled = False


class Replica:
    """One storage replica as a message-at-a-time state machine."""

    def __init__(
        self,
        config: ReplicaConfig,
        coin,
        te_share: TeSecretShare | None = None,
        owner_mac_keys: dict[str, bytes] | None = None,
        store: StoreLog | None = None,
    ):
        self.cfg = config
        self.coin = coin  # coin(epoch, index, round) -> bit
        self.te_share = te_share
        self.owner_mac_keys = owner_mac_keys if owner_mac_keys is not None else {}
        self.store = store or StoreLog()
        self.buffer: list[Tx] = []
        self._buffered: set[bytes] = set()
        self.current_epoch = 0
        self.epochs: dict[int, _EpochState] = {}
        self.delivery_log: list[tuple[int, int, bytes]] = []  # (epoch, slot, h)
        self.byzantine_evidence: list[str] = []
        self.epoch_started_at: dict[int, int] = {}

    # ------------------------------------------------------------------

    def node_name(self) -> str:
        return f"replica-{self.cfg.replica_id}"

    def _epoch(self, e: int) -> _EpochState:
        st = self.epochs.get(e)
        if st is None:
            st = self.epochs[e] = _EpochState()
        return st

    def _rbc(self, e: int, proposer: int) -> RbcInstance:
        st = self._epoch(e)
        inst = st.rbc.get(proposer)
        if inst is None:
            inst = st.rbc[proposer] = RbcInstance(
                self.cfg.n,
                self.cfg.f,
                self.cfg.replica_id,
                e,
                proposer,
                self.cfg.coded_threshold,
            )
        return inst

    def _aba(self, e: int, index: int) -> AbaInstance:
        st = self._epoch(e)
        inst = st.aba.get(index)
        if inst is None:
            inst = st.aba[index] = AbaInstance(
                self.cfg.n,
                self.cfg.f,
                self.cfg.replica_id,
                e,
                index,
                lambda r, _e=e, _i=index: self.coin(_e, _i, r),
            )
        return inst

    # ------------------------------------------------------------------

    def on_message(self, sender: str, msg: M.Message, api) -> None:
        if isinstance(msg, M.SubmitWrite):
            self._on_submit(sender, msg, api)
        elif isinstance(msg, M.ReadRequest):
            self._on_read(sender, msg, api)
        elif isinstance(
            msg,
            (M.RbcInit, M.RbcEcho, M.RbcReady, M.RbcVal, M.RbcEchoFrag, M.RbcReadyCoded),
        ):
            self._on_rbc(sender, msg, api)
        elif isinstance(msg, (M.AbaBval, M.AbaAux, M.AbaDecided)):
            self._on_aba(sender, msg, api)

    # --- write admission ----------------------------------------------

    def _valid_tx(self, tx: Tx) -> bool:
        key = self.owner_mac_keys.get(tx.origin)
        if key is None:
            return False
        return hmac.compare_digest(owner_mac(key, tx.h, tx.sigma), tx.mac)

    def _on_submit(self, sender: str, msg: M.SubmitWrite, api) -> None:
        tx = Tx(h=msg.h, sigma=msg.sigma, origin=msg.origin, mac=msg.mac)
        try:
            CipherBundle.decode(tx.sigma)
        except CodecError:
            api.trace("admission_rejected", h=tx.h.hex(), reason="malformed bundle")
            api.send(sender, M.WriteAck(h=tx.h, ok=0))
            return
        if not self._valid_tx(tx):
            api.trace("admission_rejected", h=tx.h.hex(), reason="bad origin tag")
            api.send(sender, M.WriteAck(h=tx.h, ok=0))
            return
        existing = self.store.get(tx.h)
        if existing is not None:
            # idempotent re-commit of identical content; conflicting content flagged
            if existing.sigma != tx.sigma:
                self.byzantine_evidence.append(f"conflicting sigma for {tx.h.hex()}")
                api.send(sender, M.WriteAck(h=tx.h, ok=0))
            else:
                api.send(sender, M.WriteAck(h=tx.h, ok=1))
            return
        if tx.h not in self._buffered:
            self.buffer.append(tx)
            self._buffered.add(tx.h)
        self._maybe_start_epoch(api)

    # --- protocol plumbing ---------------------------------------------

    def _replica_id_of(self, name: str) -> int | None:
        if name.startswith("replica-"):
            try:
                rid = int(name.split("-", 1)[1])
            except ValueError:
                return None
            if 0 <= rid < self.cfg.n:
                return rid
        return None

    def _emit(self, actions: list, api) -> None:
        me = self.cfg.replica_id
        for act in actions:
            if isinstance(act, Bcast):
                for i in range(self.cfg.n):
                    if i != me:
                        api.send(f"replica-{i}", act.msg)
            elif isinstance(act, Send):
                if act.dest != me:
                    api.send(f"replica-{act.dest}", act.msg)

    def _on_rbc(self, sender: str, msg, api) -> None:
        rid = self._replica_id_of(sender)
        if rid is None:
            return
        e = msg.epoch
        inst = self._rbc(e, msg.proposer)
        before = inst.delivered
        self._emit(inst.handle(rid, msg), api)
        if inst.byzantine_evidence:
            self.byzantine_evidence.extend(
                f"epoch {e} rbc {msg.proposer}: {ev}" for ev in inst.byzantine_evidence
            )
            inst.byzantine_evidence.clear()
        if before is None and inst.delivered is not None:
            self._on_rbc_delivered(e, msg.proposer, inst.delivered, api)
        self._join_epoch_if_current(e, api)

    def _on_aba(self, sender: str, msg, api) -> None:
        rid = self._replica_id_of(sender)
        if rid is None:
            return
        e = msg.epoch
        inst = self._aba(e, msg.index)
        before = inst.decided
        self._emit(inst.handle(rid, msg), api)
        if before is None and inst.decided is not None:
            self._on_aba_decided(e, api)
        self._join_epoch_if_current(e, api)

    def _on_rbc_delivered(self, e: int, proposer: int, payload: bytes, api) -> None:
        st = self._epoch(e)
        st.proposals[proposer] = payload
        aba = self._aba(e, proposer)
        if aba.input_bit is None:
            before = aba.decided
            self._emit(aba.input(1), api)
            if before is None and aba.decided is not None:
                self._on_aba_decided(e, api)
        self._try_commit(api)

    def _on_aba_decided(self, e: int, api) -> None:
        st = self._epoch(e)
        ones = sum(1 for a in st.aba.values() if a.decided == 1)
        if ones >= self.cfg.n - self.cfg.f and not st.zero_filled:
            st.zero_filled = True
            for j in range(self.cfg.n):
                aba = self._aba(e, j)
                if aba.input_bit is None:
                    before = aba.decided
                    self._emit(aba.input(0), api)
                    if before is None and aba.decided is not None:
                        self._on_aba_decided(e, api)
        self._try_commit(api)

    # --- epoch lifecycle -------------------------------------------------

    def _join_epoch_if_current(self, e: int, api) -> None:
        if e == self.current_epoch and not self._epoch(e).started:
            self._start_epoch(api)

    def _maybe_start_epoch(self, api) -> None:
        if self.buffer and not self._epoch(self.current_epoch).started:
            self._start_epoch(api)

    def _start_epoch(self, api) -> None:
        e = self.current_epoch
        st = self._epoch(e)
        st.started = True
        self.epoch_started_at[e] = api.now
        batch = self.buffer[: self.cfg.per_replica_batch]
        payload = encode_batch(batch)
        inst = self._rbc(e, self.cfg.replica_id)
        self._emit(inst.start(payload), api)
        api.trace("epoch_proposed", epoch=e, txs=len(batch))
        if inst.delivered is not None:  # n == 1 degenerate case
            self._on_rbc_delivered(e, self.cfg.replica_id, inst.delivered, api)

    def _try_commit(self, api) -> None:
        while True:
            e = self.current_epoch
            st = self._epoch(e)
            if st.committed or not st.started:
                return
            if len(st.aba) < self.cfg.n:
                return
            if any(a.decided is None for a in st.aba.values()):
                return
            winners = [j for j in range(self.cfg.n) if st.aba[j].decided == 1]
            if any(j not in st.proposals for j in winners):
                return  # agreement said yes but the proposal is still in flight
            self._commit(e, winners, api)
            if self.buffer or self._epoch(self.current_epoch).started:
                self._maybe_start_epoch(api)
                continue
            # join an epoch whose traffic arrived before we advanced
            nxt = self._epoch(self.current_epoch)
            if (nxt.rbc or nxt.aba) and not nxt.started:
                self._start_epoch(api)
                continue
            return

    def _commit(self, e: int, winners: list[int], api) -> None:
        st = self._epoch(e)
        st.committed = True
        slot = 0
        decided_hashes: set[bytes] = set()
        for j in winners:
            try:
                txs = decode_batch(st.proposals[j])
            except CodecError:
                self.byzantine_evidence.append(f"epoch {e}: undecodable proposal from {j}")
                continue
            for tx in txs:
                decided_hashes.add(tx.h)
                if tx.h in self.store:
                    continue
                if not self._valid_tx(tx):
                    self.byzantine_evidence.append(
                        f"epoch {e}: forged origin tag on {tx.h.hex()} from proposer {j}"
                    )
                    continue
                try:
                    bundle = CipherBundle.decode(tx.sigma)
                except CodecError:
                    self.byzantine_evidence.append(f"epoch {e}: undecodable bundle from {j}")
                    continue
                self.store.append(
                    StoreEntry(h=tx.h, sigma=tx.sigma, at=bundle.tag, epoch=e, slot=slot)
                )
                self.delivery_log.append((e, slot, tx.h))
                api.trace("tx_commit", h=tx.h.hex(), epoch=e, slot=slot)
                slot += 1
                api.send(tx.origin, M.WriteAck(h=tx.h, ok=1))
        # a decided tx is consumed even when it was skipped: every correct
        # replica made the same call, so re-proposing it can never help
        if decided_hashes & self._buffered:
            self._buffered -= decided_hashes
            self.buffer = [b for b in self.buffer if b.h not in decided_hashes]
        api.trace(
            "epoch_commit",
            epoch=e,
            txs=slot,
            winners=len(winners),
            started_at=self.epoch_started_at.get(e, api.now),
        )
        self.current_epoch = e + 1

    # --- read path -------------------------------------------------------

    def _on_read(self, sender: str, msg: M.ReadRequest, api) -> None:
        entry = self.store.get(msg.h)
        if entry is None:
            api.send(
                sender,
                M.ReadResponse(h=msg.h, status=M.READ_NOT_FOUND, sigma=b"", c_m=b"", share=b""),
            )
            return
        try:
            bundle = CipherBundle.decode(entry.sigma)
        except CodecError:
            api.trace("corrupt_store", h=msg.h.hex())
            api.send(
                sender,
                M.ReadResponse(h=msg.h, status=M.READ_NOT_FOUND, sigma=b"", c_m=b"", share=b""),
            )
            return
        if bundle.tag != AccessType.TE:
            api.send(
                sender,
                M.ReadResponse(h=msg.h, status=M.READ_BUNDLE, sigma=entry.sigma, c_m=b"", share=b""),
            )
            return
        if self.te_share is None:
            api.send(
                sender,
                M.ReadResponse(h=msg.h, status=M.READ_NOT_FOUND, sigma=b"", c_m=b"", share=b""),
            )
            return
        grp = self.te_share.pk.group()
        try:
            ct = TeCiphertext.decode(grp, bundle.x)
            share = te_share_dec(self.te_share, ct, msg.h, api.rng)
        except (CodecError, LabelMismatch, GatedStoreError):
            api.trace("corrupt_store", h=msg.h.hex())
            api.send(
                sender,
                M.ReadResponse(h=msg.h, status=M.READ_NOT_FOUND, sigma=b"", c_m=b"", share=b""),
            )
            return
        # the wrapped-key ciphertext rides along: share verification is a
        # public check against it
        api.send(
            sender,
            M.ReadResponse(
                h=msg.h,
                status=M.READ_SHARE,
                sigma=bundle.x,
                c_m=bundle.c_m,
                share=share.encode(grp),
            ),
        )
