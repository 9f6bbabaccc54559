"""Key generation center.

Runs every scheme setup during the synchronous bootstrap phase, registers
entities exactly once, distributes base key material by role, and releases
per-dataset requester keys strictly gated on a positive verifier report.

Released attribute keys always embed the requester's *registered*
attributes -- never the attributes claimed in a session -- so over-claiming
toward the verifier cannot widen decryption power.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .bft import messages as M
from .crypto import abe_keygen, abe_setup, be_build_tree, pke_generate, te_setup
from .crypto import keyfile
from .crypto.abe import AbeKeys
from .crypto.hybridpke import PkeKeyPair
from .crypto.subtree import SubtreeKeyTree
from .crypto.te import TeKeys
from .errors import AccessDenied, DuplicateIdentity, GatedStoreError
from .model import AccessType

ROLES = ("owner", "requester", "replica", "verifier")


@dataclass(frozen=True)
class Registration:
    identity: str
    role: str
    abe_attrs: frozenset[str] = frozenset()
    be_leaf: int | None = None
    te_identity: str | None = None
    replica_id: int | None = None


@dataclass
class DatasetKey:
    at: AccessType
    sk_rsa: bytes  # key record bytes


class Kgc:
    def __init__(
        self,
        rng: random.Random,
        n: int = 4,
        f: int = 1,
        be_group_size: int = 8,
        abe_level: int = 128,
    ):
        self.rng = rng
        self.n, self.f = n, f
        self.abe: AbeKeys = abe_setup(abe_level, rng)
        self.be_tree: SubtreeKeyTree = be_build_tree(be_group_size, rng.randbytes(32))
        self.te: TeKeys = te_setup(n, f + 1, rng)
        self.verifier_keys: PkeKeyPair = pke_generate(rng)
        self._verifier_sk_released = False
        self.registry: dict[str, Registration] = {}
        self.owner_mac_keys: dict[str, bytes] = {}
        self.dataset_keys: dict[str, DatasetKey] = {}
        self.reports: dict[tuple[str, str], bool] = {}  # (requester, txid) -> res
        self.releases: list[tuple[str, str]] = []

    # --- registration (synchronous bootstrap phase) ---------------------

    def register(self, identity: str, role: str, **credentials) -> dict:
        """Register an entity and hand back its base key material."""
        if role not in ROLES:
            raise GatedStoreError(f"unknown role {role!r}")
        if identity in self.registry:
            raise DuplicateIdentity(identity)
        reg = Registration(
            identity=identity,
            role=role,
            abe_attrs=frozenset(credentials.get("abe_attrs", ())),
            be_leaf=credentials.get("be_leaf"),
            te_identity=identity if role == "requester" else None,
            replica_id=credentials.get("replica_id"),
        )
        self.registry[identity] = reg
        issued: dict = {"verifier_pk": self.verifier_keys.pk, "abe_pk": self.abe.pk}
        if role == "owner":
            key = self.rng.randbytes(32)
            self.owner_mac_keys[identity] = key
            issued.update(mac_key=key, be_tree=self.be_tree, te_pk=self.te.pk)
        elif role == "requester":
            issued.update(te_vk=self.te.vk)
            if reg.be_leaf is not None:
                issued.update(
                    be_leaf_keys=self.be_tree.leaf_keys(reg.be_leaf), be_leaf=reg.be_leaf
                )
        elif role == "replica":
            rid = reg.replica_id
            if rid is None or not 0 <= rid < self.n:
                raise GatedStoreError("replica registration requires a valid replica_id")
            issued.update(te_share=self.te.shares[rid], te_vk=self.te.vk)
        elif role == "verifier":
            if self._verifier_sk_released:
                raise GatedStoreError("verifier keypair already released")
            self._verifier_sk_released = True
            issued.update(verifier_sk=self.verifier_keys.sk)
        return issued

    # --- verdicts and key release ----------------------------------------

    def record_report(self, requester_id: str, txid: str, res: bool) -> None:
        self.reports[(requester_id, txid)] = bool(res)

    def store_dataset_key(self, txid: str, at: AccessType, sk_rsa: bytes) -> None:
        self.dataset_keys.setdefault(txid, DatasetKey(at=at, sk_rsa=sk_rsa))

    def release_key(self, requester_id: str, txid: str) -> tuple[AccessType, bytes]:
        """Key record for an approved session, or :class:`AccessDenied`."""
        reg = self.registry.get(requester_id)
        if reg is None or reg.role != "requester":
            raise AccessDenied(f"unknown requester {requester_id!r}")
        res = self.reports.get((requester_id, txid))
        if res is not True:
            raise AccessDenied("no positive verifier report on file")
        ds = self.dataset_keys.get(txid)
        if ds is None:
            raise AccessDenied("no dataset key registered for this txid")
        if ds.at == AccessType.ABE:
            if not reg.abe_attrs:
                raise AccessDenied("requester registered no attributes")
            sk = abe_keygen(self.abe, reg.abe_attrs, self.rng)
            record = keyfile.encode_abe_secret(sk)
        else:
            record = ds.sk_rsa
        self.releases.append((requester_id, txid))
        return ds.at, record

    # --- message adapter ---------------------------------------------------

    def on_message(self, sender: str, msg: M.Message, api) -> None:
        if isinstance(msg, M.VerifierReport):
            if sender != "verifier":
                api.trace("kgc_rejected_report", sender=sender)
                return
            self.record_report(msg.requester, msg.txid, bool(msg.res))
            api.trace("kgc_report", txid=msg.txid, requester=msg.requester, res=msg.res)
        elif isinstance(msg, M.StoreDatasetKey):
            reg = self.registry.get(sender)
            if reg is None or reg.role != "owner":
                api.send(sender, M.StoreDatasetKeyAck(txid=msg.txid, ok=0))
                return
            self.store_dataset_key(msg.txid, AccessType.from_byte(msg.at), msg.sk_rsa)
            api.send(sender, M.StoreDatasetKeyAck(txid=msg.txid, ok=1))
        elif isinstance(msg, M.ReleaseRequest):
            self._on_release(sender, msg, api)
        elif isinstance(msg, M.Register):
            try:
                self.register(msg.identity, msg.role, **json.loads(msg.payload or b"{}"))
                api.send(sender, M.RegisterAck(identity=msg.identity, ok=1, payload=b""))
            except (DuplicateIdentity, GatedStoreError) as exc:
                api.send(
                    sender,
                    M.RegisterAck(identity=msg.identity, ok=0, payload=str(exc).encode()),
                )

    def _on_release(self, sender: str, msg: M.ReleaseRequest, api) -> None:
        res = self.reports.get((sender, msg.txid))
        if res is None or (res is True and msg.txid not in self.dataset_keys):
            # verifier report or dataset key still in flight; the requester
            # backs off and retries
            api.send(
                sender,
                M.ReleaseResponse(txid=msg.txid, status=M.RELEASE_PENDING, at=0, key=b""),
            )
            return
        try:
            at, record = self.release_key(sender, msg.txid)
        except AccessDenied as exc:
            api.trace("key_denied", requester=sender, txid=msg.txid, reason=str(exc))
            api.send(
                sender,
                M.ReleaseResponse(txid=msg.txid, status=M.RELEASE_DENIED, at=0, key=b""),
            )
            return
        api.trace("key_released", requester=sender, txid=msg.txid, at=at.value)
        api.send(
            sender,
            M.ReleaseResponse(txid=msg.txid, status=M.RELEASE_GRANTED, at=at.value, key=record),
        )

    # --- persistence --------------------------------------------------------

    def export_registry(self, path: str | Path) -> None:
        with Path(path).open("w") as fh:
            for reg in self.registry.values():
                fh.write(
                    json.dumps(
                        {
                            "identity": reg.identity,
                            "role": reg.role,
                            "abe_attrs": sorted(reg.abe_attrs),
                            "be_leaf": reg.be_leaf,
                            "replica_id": reg.replica_id,
                        }
                    )
                    + "\n"
                )
