"""Reliable broadcast: all correct replicas deliver the same value or none.

Three-phase echo broadcast.  Small payloads travel whole; payloads above
``coded_threshold`` are erasure-coded into n fragments (any n-2f rebuild)
with a fragment-hash commitment standing in for the usual Merkle tree --
replica counts here are small enough that shipping the full hash list is
cheaper than branches.

Instances are pure state machines: ``handle`` consumes one message and
returns the messages to emit.  ``Bcast`` fans out to every replica, ``Send``
targets one.  Own messages are tallied locally without a network loopback.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..crypto.aead import sha256
from . import erasure
from . import messages as M

CODED_THRESHOLD = 64 * 1024


@dataclass(frozen=True)
class Bcast:
    msg: M.Message


@dataclass(frozen=True)
class Send:
    dest: int
    msg: M.Message


def _root(n: int, orig_len: int, hash_list: tuple[bytes, ...]) -> bytes:
    return sha256(b"rbc-root|%d|%d|" % (n, orig_len) + b"".join(hash_list))


class RbcInstance:
    def __init__(self, n: int, f: int, me: int, epoch: int, proposer: int,
                 coded_threshold: int = CODED_THRESHOLD):
        self.n, self.f, self.me = n, f, me
        self.epoch, self.proposer = epoch, proposer
        self.coded_threshold = coded_threshold
        self.echo_threshold = (n + f + 2) // 2  # ceil((n+f+1)/2)
        self.delivered: bytes | None = None
        self.byzantine_evidence: list[str] = []
        # plain path
        self._init_payload: bytes | None = None
        self._echoed = False
        self._echo_senders: dict[bytes, set[int]] = {}
        self._ready_senders: dict[bytes, set[int]] = {}
        self._sent_ready = False
        # coded path
        self._coded_meta: dict[bytes, tuple[int, tuple[bytes, ...]]] = {}
        self._frags: dict[bytes, dict[int, bytes]] = {}
        self._frag_senders: dict[bytes, set[int]] = {}
        self._ready_c_senders: dict[bytes, set[int]] = {}
        self._val_root: bytes | None = None

    # ------------------------------------------------------------------

    def start(self, payload: bytes) -> list:
        """Proposer entry point."""
        assert self.me == self.proposer
        if len(payload) <= self.coded_threshold:
            msg = M.RbcInit(epoch=self.epoch, proposer=self.proposer, payload=payload)
            out = [Bcast(msg)]
            out.extend(self._on_init(self.me, payload))
            return out
        k = self.n - 2 * self.f
        frags = erasure.encode(payload, k, self.n)
        hash_list = tuple(sha256(fr) for fr in frags)
        out = []
        for i in range(self.n):
            msg = M.RbcVal(
                epoch=self.epoch,
                proposer=self.proposer,
                orig_len=len(payload),
                frag_index=i,
                frag=frags[i],
                hash_list=hash_list,
            )
            if i == self.me:
                out.extend(self._on_val(self.me, msg))
            else:
                out.append(Send(i, msg))
        return out

    def handle(self, sender: int, msg: M.Message) -> list:
        if self.delivered is not None and not isinstance(
            msg, (M.RbcReady, M.RbcReadyCoded)
        ):
            return []  # late traffic for a finished instance
        if isinstance(msg, M.RbcInit):
            if sender != self.proposer:
                self.byzantine_evidence.append(f"INIT from non-proposer {sender}")
                return []
            return self._on_init(sender, msg.payload)
        if isinstance(msg, M.RbcEcho):
            return self._on_echo(sender, msg.payload)
        if isinstance(msg, M.RbcReady):
            return self._on_ready(sender, msg.payload)
        if isinstance(msg, M.RbcVal):
            if sender != self.proposer:
                self.byzantine_evidence.append(f"VAL from non-proposer {sender}")
                return []
            return self._on_val(sender, msg)
        if isinstance(msg, M.RbcEchoFrag):
            return self._on_echo_frag(sender, msg)
        if isinstance(msg, M.RbcReadyCoded):
            return self._on_ready_coded(sender, msg.root)
        return []

    # --- plain path ---------------------------------------------------

    def _on_init(self, sender: int, payload: bytes) -> list:
        if self._init_payload is not None and self._init_payload != payload:
            self.byzantine_evidence.append("conflicting INIT payloads")
            return []
        self._init_payload = payload
        if self._echoed:
            return []
        self._echoed = True
        out = [Bcast(M.RbcEcho(epoch=self.epoch, proposer=self.proposer, payload=payload))]
        out.extend(self._on_echo(self.me, payload))
        return out

    def _on_echo(self, sender: int, payload: bytes) -> list:
        senders = self._echo_senders.setdefault(payload, set())
        senders.add(sender)
        if len(senders) >= self.echo_threshold and not self._sent_ready:
            return self._emit_ready(payload)
        return []

    def _emit_ready(self, payload: bytes) -> list:
        self._sent_ready = True
        out = [Bcast(M.RbcReady(epoch=self.epoch, proposer=self.proposer, payload=payload))]
        out.extend(self._on_ready(self.me, payload))
        return out

    def _on_ready(self, sender: int, payload: bytes) -> list:
        senders = self._ready_senders.setdefault(payload, set())
        senders.add(sender)
        out = []
        if len(senders) >= self.f + 1 and not self._sent_ready:
            out.extend(self._emit_ready(payload))
        if len(senders) >= 2 * self.f + 1 and self.delivered is None:
            self.delivered = payload
        return out

    # --- coded path ---------------------------------------------------

    def _on_val(self, sender: int, msg) -> list:
        hash_list = tuple(msg.hash_list)
        if len(hash_list) != self.n or sha256(msg.frag) != hash_list[msg.frag_index]:
            self.byzantine_evidence.append("VAL fragment does not match its hash")
            return []
        root = _root(self.n, msg.orig_len, hash_list)
        if self._val_root is not None and self._val_root != root:
            self.byzantine_evidence.append("conflicting VAL roots")
            return []
        self._val_root = root
        if self._echoed:
            return []
        self._echoed = True
        echo = M.RbcEchoFrag(
            epoch=self.epoch,
            proposer=self.proposer,
            orig_len=msg.orig_len,
            frag_index=msg.frag_index,
            frag=msg.frag,
            hash_list=hash_list,
        )
        out = [Bcast(echo)]
        out.extend(self._on_echo_frag(self.me, echo))
        return out

    def _on_echo_frag(self, sender: int, msg) -> list:
        hash_list = tuple(msg.hash_list)
        if (
            len(hash_list) != self.n
            or not 0 <= msg.frag_index < self.n
            or sha256(msg.frag) != hash_list[msg.frag_index]
        ):
            return []
        root = _root(self.n, msg.orig_len, hash_list)
        self._coded_meta.setdefault(root, (msg.orig_len, hash_list))
        self._frags.setdefault(root, {})[msg.frag_index] = msg.frag
        senders = self._frag_senders.setdefault(root, set())
        senders.add(sender)
        out = []
        if len(senders) >= self.n - self.f and not self._sent_ready:
            if self._decode_and_check(root) is not None:
                out.extend(self._emit_ready_coded(root))
        out.extend(self._maybe_deliver_coded(root))
        return out

    def _decode_and_check(self, root: bytes) -> bytes | None:
        """Rebuild the payload and confirm it re-encodes to this root."""
        orig_len, hash_list = self._coded_meta[root]
        k = self.n - 2 * self.f
        frags = self._frags.get(root, {})
        if len(frags) < k:
            return None
        try:
            payload = erasure.decode(frags, k, orig_len)
        except Exception:
            return None
        recoded = erasure.encode(payload, k, self.n)
        if tuple(sha256(fr) for fr in recoded) != hash_list:
            self.byzantine_evidence.append("decoded payload does not match commitment")
            return None
        return payload

    def _emit_ready_coded(self, root: bytes) -> list:
        self._sent_ready = True
        out = [Bcast(M.RbcReadyCoded(epoch=self.epoch, proposer=self.proposer, root=root))]
        out.extend(self._on_ready_coded(self.me, root))
        return out

    def _on_ready_coded(self, sender: int, root: bytes) -> list:
        senders = self._ready_c_senders.setdefault(root, set())
        senders.add(sender)
        out = []
        if len(senders) >= self.f + 1 and not self._sent_ready:
            out.extend(self._emit_ready_coded(root))
        out.extend(self._maybe_deliver_coded(root))
        return out

    def _maybe_deliver_coded(self, root: bytes) -> list:
        if self.delivered is not None:
            return []
        if len(self._ready_c_senders.get(root, ())) < 2 * self.f + 1:
            return []
        if root not in self._coded_meta:
            return []
        payload = self._decode_and_check(root)
        if payload is not None:
            self.delivered = payload
        return []

    # ------------------------------------------------------------------

    def state_key(self):
        """Hashable snapshot for bounded model checking (plain path)."""
        return (
            self._init_payload,
            self._echoed,
            self._sent_ready,
            self.delivered,
            tuple(sorted((p, tuple(sorted(s))) for p, s in self._echo_senders.items())),
            tuple(sorted((p, tuple(sorted(s))) for p, s in self._ready_senders.items())),
        )
