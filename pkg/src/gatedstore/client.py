"""Data-owner and data-requester protocol drivers.

An owner session walks: encrypt -> submit to one randomly selected replica
(resubmitting elsewhere on timeout) -> wait for f+1 acks -> anchor
(access type, digest ciphertext, policy ciphertext) on the ledger -> hand
the dataset key to the key center.  A requester session walks: fetch the
record -> encrypted-credential check at the verifier -> key release gated
on the verdict -> quorum read -> decrypt -> digest check -> deliver
exactly once.

No off-chain read is sent before a key release, and a recovered payload is
delivered only when its digest matches the anchored one; a mismatch
discards the payload.  Retries use exponential backoff in simulated time;
under pure asynchrony completion is eventual, never deadline-bound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .bft import messages as M
from .crypto import aead, keyfile
from .crypto.abe import AbePublicKey, AbeSecretKey
from .crypto.engine import (
    AbeReadKey,
    BeReadKey,
    OwnerWriteKeys,
    TeReadKey,
    decrypt_get_hash,
    read_engine,
    write_engine,
)
from .crypto.hybridpke import PkePublicKey, PkeSecretKey, pke_encrypt, pke_generate
from .crypto.subtree import SubtreeKeyTree
from .crypto.te import DecryptionShare, TeCiphertext, TePublicKey, TeVerificationKey, te_verify_share
from .errors import AccessDenied, CodecError, EmptyAudience, GatedStoreError, KeyMismatch
from .model import AccessType, CipherBundle, PartialAttribute, Policy
from .verifier import VERIFIER_CONTEXT

SUBMIT_RETRY_BASE = 256
SUBMIT_RETRY_CAP = 4096
RELEASE_RETRY_BASE = 64
RELEASE_RETRY_CAP = 2048
READ_RETRY_BASE = 128
READ_RETRY_CAP = 4096

# session terminal states
DONE = "done"
PENDING = "pending"
ACCESS_DENIED = "access_denied"
INTEGRITY_FAIL = "integrity_fail"
NOT_FOUND = "not_found"
FAILED = "failed"


@dataclass(frozen=True)
class StartWrite(M.Message):
    m: bytes = b""
    at: AccessType = AccessType.TE
    attribute_list: object = None


@dataclass(frozen=True)
class StartRead(M.Message):
    txid: str = ""
    p_u: PartialAttribute | None = None


@dataclass(frozen=True)
class WriteDone(M.Message):
    txid: str = ""
    h: bytes = b""
    owner: str = ""


@dataclass(frozen=True)
class ReadDone(M.Message):
    txid: str = ""
    status: str = ""
    requester: str = ""


def derive_policy(at: AccessType, attribute_list, h: bytes, tree: SubtreeKeyTree) -> Policy:
    """Owner-side policy generation from the attribute list."""
    if at == AccessType.ABE:
        return Policy(tag=at, abe_formula=str(attribute_list))
    if at == AccessType.BE:
        return Policy(
            tag=at, be_group_size=tree.n_clients, be_revoked=frozenset(attribute_list)
        )
    return Policy(tag=at, te_label=h, te_authorized=frozenset(attribute_list))


@dataclass
class OwnerSession:
    h: bytes
    at: AccessType
    policy: Policy
    sigma: bytes
    c_h: bytes
    rsa_sk_record: bytes
    state: str = PENDING
    acks: set[str] = field(default_factory=set)
    txid: str | None = None
    onchain_sent: bool = False
    backoff: int = SUBMIT_RETRY_BASE
    tried: list[int] = field(default_factory=list)
    t_start: int = 0
    t_acked: int | None = None
    t_txid: int | None = None
    enc_wall_s: float = 0.0


class OwnerNode:
    """One data owner; drives any number of concurrent write sessions."""

    def __init__(
        self,
        identity: str,
        n: int,
        f: int,
        mac_key: bytes,
        write_keys_abe: AbePublicKey,
        be_tree: SubtreeKeyTree,
        te_pk: TePublicKey,
        verifier_pk: PkePublicKey,
        driver: str | None = None,
    ):
        self.identity = identity
        self.n, self.f = n, f
        self.mac_key = mac_key
        self.abe_pk = write_keys_abe
        self.be_tree = be_tree
        self.te_pk = te_pk
        self.verifier_pk = verifier_pk
        self.driver = driver
        self.sessions: dict[bytes, OwnerSession] = {}
        self._by_txid_pending: dict[str, bytes] = {}
        self._onchain_refs: dict[int, bytes] = {}
        self._next_ref = 0

    # ------------------------------------------------------------------

    def on_message(self, sender: str, msg: M.Message, api) -> None:
        if isinstance(msg, StartWrite):
            self._start_write(msg, api)
        elif isinstance(msg, M.Timer):
            if msg.token == "owner_retry":
                self._retry(msg.data[0], api)
        elif isinstance(msg, M.WriteAck):
            self._on_ack(sender, msg, api)
        elif isinstance(msg, M.LedgerTxid):
            self._on_txid(msg, api)
        elif isinstance(msg, M.StoreDatasetKeyAck):
            self._on_key_stored(msg, api)

    def _start_write(self, msg: StartWrite, api) -> None:
        t0 = time.perf_counter()
        h = aead.sha256(msg.m)
        try:
            policy = derive_policy(msg.at, msg.attribute_list, h, self.be_tree)
            policy.validate()
            rsa = pke_generate(api.rng)
            keys = OwnerWriteKeys(
                abe_pk=self.abe_pk, be_tree=self.be_tree, te_pk=self.te_pk, rsa_pk=rsa.pk
            )
            result = write_engine(msg.m, msg.at, policy, keys, api.rng)
        except (EmptyAudience, GatedStoreError) as exc:
            api.trace("owner_write_refused", reason=type(exc).__name__, at=msg.at.value)
            if self.driver:
                api.send(self.driver, WriteDone(txid="", h=h, owner=self.identity))
            return
        sess = OwnerSession(
            h=result.h,
            at=msg.at,
            policy=policy,
            sigma=result.bundle.encode(),
            c_h=result.c_h,
            rsa_sk_record=keyfile.encode_pke_secret(rsa.sk) if msg.at != AccessType.ABE else b"",
            t_start=api.now,
            enc_wall_s=time.perf_counter() - t0,
        )
        self.sessions[result.h] = sess
        self._submit(sess, api)
        api.trace("owner_write_start", h=result.h.hex(), at=msg.at.value)

    def _submit(self, sess: OwnerSession, api) -> None:
        target = api.rng.randrange(self.n)
        sess.tried.append(target)
        mac = _owner_mac(self.mac_key, sess.h, sess.sigma)
        api.send(
            f"replica-{target}",
            M.SubmitWrite(h=sess.h, sigma=sess.sigma, origin=self.identity, mac=mac),
        )
        api.set_timer(sess.backoff, M.Timer(token="owner_retry", data=(sess.h,)))
        sess.backoff = min(sess.backoff * 2, SUBMIT_RETRY_CAP)

    def _retry(self, h: bytes, api) -> None:
        sess = self.sessions.get(h)
        if sess is None or len(sess.acks) > self.f or sess.state == DONE:
            return
        self._submit(sess, api)
        api.trace("owner_resubmit", h=h.hex())

    def _on_ack(self, sender: str, msg: M.WriteAck, api) -> None:
        sess = self.sessions.get(msg.h)
        if sess is None or not msg.ok:
            return
        sess.acks.add(sender)
        if len(sess.acks) >= self.f + 1 and not sess.onchain_sent:
            sess.onchain_sent = True
            sess.t_acked = api.now
            c_p = pke_encrypt(self.verifier_pk, sess.policy.encode(), VERIFIER_CONTEXT, api.rng)
            from .ledger import OnChainRecord

            record = OnChainRecord(
                at=sess.at, c_h=sess.c_h, c_p=c_p, owner_id=self.identity, timestamp=api.now
            )
            self._next_ref += 1
            self._onchain_refs[self._next_ref] = sess.h
            api.send("ledger", M.LedgerSubmit(ref=self._next_ref, record=record.encode()))

    def _on_txid(self, msg: M.LedgerTxid, api) -> None:
        h = self._onchain_refs.pop(msg.ref, None)
        if h is None:
            return
        if not msg.txid:
            api.trace("owner_onchain_rejected", owner=self.identity, h=h.hex())
            return
        sess = self.sessions[h]
        sess.txid = msg.txid
        sess.t_txid = api.now
        self._by_txid_pending[msg.txid] = sess.h
        api.send(
            "kgc",
            M.StoreDatasetKey(txid=msg.txid, at=sess.at.value, sk_rsa=sess.rsa_sk_record),
        )

    def _on_key_stored(self, msg: M.StoreDatasetKeyAck, api) -> None:
        h = self._by_txid_pending.pop(msg.txid, None)
        if h is None:
            return
        sess = self.sessions[h]
        sess.state = DONE
        api.trace(
            "owner_write_done",
            h=sess.h.hex(),
            txid=msg.txid,
            at=sess.at.value,
            t_start=sess.t_start,
            t_acked=sess.t_acked,
            t_txid=sess.t_txid,
        )
        if self.driver:
            api.send(self.driver, WriteDone(txid=msg.txid, h=sess.h, owner=self.identity))


def _owner_mac(key: bytes, h: bytes, sigma: bytes) -> bytes:
    from .bft.replica import owner_mac

    return owner_mac(key, h, sigma)


@dataclass
class RequesterCreds:
    abe_attrs: frozenset[str] = frozenset()
    be_leaf: int | None = None
    be_leaf_keys: list[bytes] = field(default_factory=list)
    te_vk: TeVerificationKey | None = None


@dataclass
class RequesterSession:
    txid: str
    p_u: PartialAttribute | None = None
    at: AccessType | None = None
    c_h: bytes | None = None
    key: object = None
    h: bytes | None = None
    state: str = PENDING
    release_backoff: int = RELEASE_RETRY_BASE
    read_backoff: int = READ_RETRY_BASE
    responses: dict[str, M.ReadResponse] = field(default_factory=dict)
    te_verified: dict = field(default_factory=dict)  # (c_m, x) -> {rid: share}
    te_seen: set = field(default_factory=set)
    reads_sent: int = 0
    m: bytes | None = None
    t_start: int = 0
    t_record: int | None = None
    t_key: int | None = None
    t_delivered: int | None = None
    dec_wall_s: float = 0.0


class RequesterNode:
    """One data requester; sessions keyed by txid, delivery is exactly-once."""

    def __init__(
        self,
        identity: str,
        n: int,
        f: int,
        creds: RequesterCreds,
        verifier_pk: PkePublicKey,
        driver: str | None = None,
    ):
        self.identity = identity
        self.n, self.f = n, f
        self.creds = creds
        self.verifier_pk = verifier_pk
        self.driver = driver
        self.sessions: dict[str, RequesterSession] = {}
        self.delivered: set[str] = set()
        self._h_to_txid: dict[bytes, str] = {}

    # ------------------------------------------------------------------

    def on_message(self, sender: str, msg: M.Message, api) -> None:
        if isinstance(msg, StartRead):
            self._start_read(msg, api)
        elif isinstance(msg, M.LedgerRecord):
            self._on_record(msg, api)
        elif isinstance(msg, M.ReleaseResponse):
            self._on_release(msg, api)
        elif isinstance(msg, M.ReadResponse):
            self._on_read_response(sender, msg, api)
        elif isinstance(msg, M.Timer):
            if msg.token == "release_retry":
                self._release_request(msg.data[0], api)
            elif msg.token == "read_retry":
                self._broadcast_read(msg.data[0], api)

    def _finish(self, sess: RequesterSession, status: str, api) -> None:
        sess.state = status
        api.trace(
            "read_session_end",
            txid=sess.txid,
            status=status,
            reads_sent=sess.reads_sent,
            t_start=sess.t_start,
            t_record=sess.t_record,
            t_key=sess.t_key,
            t_delivered=sess.t_delivered,
        )
        if self.driver:
            api.send(self.driver, ReadDone(txid=sess.txid, status=status, requester=self.identity))

    def _start_read(self, msg: StartRead, api) -> None:
        if msg.txid in self.sessions:
            return
        sess = RequesterSession(txid=msg.txid, p_u=msg.p_u, t_start=api.now)
        self.sessions[msg.txid] = sess
        api.send("ledger", M.LedgerFetch(txid=msg.txid))

    def _honest_p_u(self, at: AccessType) -> PartialAttribute:
        if at == AccessType.ABE:
            return PartialAttribute(tag=at, abe_attrs=self.creds.abe_attrs)
        if at == AccessType.BE:
            return PartialAttribute(tag=at, be_leaf_index=self.creds.be_leaf or 0)
        return PartialAttribute(tag=at, te_identity=self.identity)

    def _on_record(self, msg: M.LedgerRecord, api) -> None:
        sess = self.sessions.get(msg.txid)
        if sess is None or sess.at is not None:
            return
        if not msg.found:
            self._finish(sess, NOT_FOUND, api)
            return
        from .ledger import OnChainRecord

        record = OnChainRecord.decode(msg.record)
        sess.at = record.at
        sess.c_h = record.c_h
        sess.t_record = api.now
        if sess.p_u is None:
            sess.p_u = self._honest_p_u(record.at)
        c_pu = pke_encrypt(self.verifier_pk, sess.p_u.encode(), VERIFIER_CONTEXT, api.rng)
        api.send("verifier", M.VerifyRequest(txid=msg.txid, at=sess.p_u.tag.value, c_pu=c_pu))
        self._release_request(msg.txid, api)

    def _release_request(self, txid: str, api) -> None:
        sess = self.sessions.get(txid)
        if sess is None or sess.key is not None or sess.state != PENDING:
            return
        api.send("kgc", M.ReleaseRequest(txid=txid))

    def _on_release(self, msg: M.ReleaseResponse, api) -> None:
        sess = self.sessions.get(msg.txid)
        if sess is None or sess.state != PENDING:
            return
        if msg.status == M.RELEASE_PENDING:
            api.set_timer(sess.release_backoff, M.Timer(token="release_retry", data=(msg.txid,)))
            sess.release_backoff = min(sess.release_backoff * 2, RELEASE_RETRY_CAP)
            return
        if msg.status == M.RELEASE_DENIED:
            self._finish(sess, ACCESS_DENIED, api)
            return
        if sess.key is not None:
            return
        try:
            key = keyfile.decode(msg.key)
            if not isinstance(key, (AbeSecretKey, PkeSecretKey)):
                raise KeyMismatch("unexpected key record type")
            sess.h = decrypt_get_hash(sess.at, key, sess.c_h)
        except (CodecError, KeyMismatch, AccessDenied) as exc:
            api.trace("digest_decrypt_failed", txid=msg.txid, reason=type(exc).__name__)
            self._finish(sess, FAILED, api)
            return
        sess.key = key
        sess.t_key = api.now
        self._h_to_txid[sess.h] = msg.txid
        api.trace("key_received", txid=msg.txid, at=sess.at.value)
        self._broadcast_read(msg.txid, api)

    def _broadcast_read(self, txid: str, api) -> None:
        sess = self.sessions.get(txid)
        if sess is None or sess.state != PENDING or sess.h is None:
            return
        sess.responses.clear()
        for i in range(self.n):
            api.send(f"replica-{i}", M.ReadRequest(h=sess.h))
        sess.reads_sent += 1
        api.trace("read_broadcast", txid=txid, round=sess.reads_sent)

    def _on_read_response(self, sender: str, msg: M.ReadResponse, api) -> None:
        txid = self._h_to_txid.get(msg.h)
        sess = self.sessions.get(txid) if txid else None
        if sess is None or sess.state != PENDING:
            return
        sess.responses.setdefault(sender, msg)
        self._try_conclude(sess, api)

    def _schedule_read_retry(self, sess: RequesterSession, api) -> None:
        api.set_timer(sess.read_backoff, M.Timer(token="read_retry", data=(sess.txid,)))
        sess.read_backoff = min(sess.read_backoff * 2, READ_RETRY_CAP)

    def _try_conclude(self, sess: RequesterSession, api) -> None:
        quorum = self.f + 1
        responses = sess.responses
        not_found = [s for s, r in responses.items() if r.status == M.READ_NOT_FOUND]
        if sess.at == AccessType.TE:
            self._try_conclude_te(sess, api)
            if sess.state == PENDING and len(not_found) >= quorum:
                self._schedule_read_retry(sess, api)
            return
        groups: dict[bytes, list[str]] = {}
        for s, r in responses.items():
            if r.status == M.READ_BUNDLE:
                groups.setdefault(r.sigma, []).append(s)
        winner = next((sig for sig, ss in groups.items() if len(ss) >= quorum), None)
        if winner is not None:
            self._decrypt_and_deliver(sess, winner, api)
            return
        if len(not_found) >= quorum:
            # tentative absence: the write may still be committing elsewhere
            self._schedule_read_retry(sess, api)

    def _try_conclude_te(self, sess: RequesterSession, api) -> None:
        vk = self.creds.te_vk
        if vk is None:
            self._finish(sess, FAILED, api)
            return
        grp = vk.pk.group()
        for s, r in sess.responses.items():
            if s in sess.te_seen or r.status != M.READ_SHARE:
                continue
            sess.te_seen.add(s)
            try:
                ct = TeCiphertext.decode(grp, r.sigma)
                share = DecryptionShare.decode(grp, r.share)
            except CodecError:
                continue
            if not te_verify_share(vk, ct, sess.h, share):
                continue
            sess.te_verified.setdefault((r.c_m, r.sigma), {})[share.replica_id] = share
        for (c_m, x), shares in sess.te_verified.items():
            if len(shares) >= self.f + 1:
                t0 = time.perf_counter()
                try:
                    ct = TeCiphertext.decode(grp, x)
                    key_material = TeReadKey(
                        vk=vk, label=sess.h, shares=tuple(shares.values())
                    )
                    bundle = CipherBundle(tag=AccessType.TE, c_m=c_m, x=x)
                    m = read_engine(bundle, key_material)
                except GatedStoreError as exc:
                    api.trace("read_decrypt_failed", txid=sess.txid, reason=type(exc).__name__)
                    continue
                sess.dec_wall_s += time.perf_counter() - t0
                self._deliver(sess, m, api)
                return

    def _decrypt_and_deliver(self, sess: RequesterSession, sigma: bytes, api) -> None:
        t0 = time.perf_counter()
        try:
            bundle = CipherBundle.decode(sigma)
            if bundle.tag != sess.at:
                raise CodecError("stored bundle tag disagrees with the on-chain access type")
            if bundle.tag == AccessType.ABE:
                key_material = AbeReadKey(sk=sess.key)
            else:
                key_material = BeReadKey(
                    leaf_keys=self.creds.be_leaf_keys, leaf_index=self.creds.be_leaf or 0
                )
            m = read_engine(bundle, key_material)
        except (CodecError, GatedStoreError) as exc:
            api.trace("read_decrypt_failed", txid=sess.txid, reason=type(exc).__name__)
            self._finish(sess, FAILED, api)
            return
        sess.dec_wall_s += time.perf_counter() - t0
        self._deliver(sess, m, api)

    def _deliver(self, sess: RequesterSession, m: bytes, api) -> None:
        if aead.sha256(m) != sess.h:
            api.trace("integrity_fail", txid=sess.txid)
            self._finish(sess, INTEGRITY_FAIL, api)
            return
        if sess.txid in self.delivered:
            return
        self.delivered.add(sess.txid)
        sess.m = m
        sess.t_delivered = api.now
        api.trace("m_delivered", txid=sess.txid, h=sess.h.hex(), size=len(m))
        self._finish(sess, DONE, api)
