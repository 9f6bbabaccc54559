"""Adversary models for the simulated network.

A spec names at most f corrupt replicas and one behavior each:

* ``crash:<id>@<time>``       stop processing and sending at a logical time
* ``mute:<id>``               receive but never send
* ``equivocate_rbc:<id>``     send conflicting proposals to disjoint halves
* ``garbage_read_replies:<id>`` answer reads with garbage
* ``delay:<id>@<factor>``     stretch delivery of the replica's traffic
* ``forge_origin:<id>``       propose a transaction with a forged origin tag

Spec strings combine with commas: ``"crash:3@0,delay:1@10"``.  ``"none"``
is the empty adversary.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..errors import GatedStoreError
from ..bft import messages as M

BEHAVIORS = ("crash", "mute", "equivocate_rbc", "garbage_read_replies", "delay", "forge_origin")


@dataclass(frozen=True)
class Corruption:
    kind: str
    replica_id: int
    param: int = 0  # crash time or delay factor


@dataclass
class AdversarySpec:
    corruptions: tuple[Corruption, ...] = ()

    @classmethod
    def parse(cls, spec: str) -> "AdversarySpec":
        spec = (spec or "none").strip()
        if spec in ("", "none"):
            return cls()
        out = []
        for part in spec.split(","):
            part = part.strip()
            if ":" not in part:
                raise GatedStoreError(f"bad adversary clause {part!r}")
            kind, rest = part.split(":", 1)
            if kind not in BEHAVIORS:
                raise GatedStoreError(f"unknown adversary behavior {kind!r}")
            if "@" in rest:
                rid_s, param_s = rest.split("@", 1)
                out.append(Corruption(kind=kind, replica_id=int(rid_s), param=int(param_s)))
            else:
                out.append(Corruption(kind=kind, replica_id=int(rest)))
        return cls(corruptions=tuple(out))

    def validate(self, n: int, f: int) -> None:
        ids = {c.replica_id for c in self.corruptions}
        if len(ids) > f:
            raise GatedStoreError(f"corruption budget exceeded: {len(ids)} > f={f}")
        for c in self.corruptions:
            if not 0 <= c.replica_id < n:
                raise GatedStoreError(f"corrupt replica {c.replica_id} out of range")

    def corrupt_ids(self) -> set[int]:
        return {c.replica_id for c in self.corruptions}

    def describe(self) -> str:
        if not self.corruptions:
            return "none"
        return ",".join(
            f"{c.kind}:{c.replica_id}" + (f"@{c.param}" if c.param else "")
            for c in self.corruptions
        )


class Adversary:
    """Applies a spec to network traffic; the replicas stay honest code."""

    def __init__(self, spec: AdversarySpec, rng: random.Random):
        self.spec = spec
        self.rng = rng
        self._crash_at: dict[str, int] = {}
        self._mute: set[str] = set()
        self._equivocate: set[str] = set()
        self._garbage: set[str] = set()
        self._delay: dict[str, int] = {}
        self.forged_origin_ids: set[int] = set()
        for c in spec.corruptions:
            name = f"replica-{c.replica_id}"
            if c.kind == "crash":
                self._crash_at[name] = c.param
            elif c.kind == "mute":
                self._mute.add(name)
            elif c.kind == "equivocate_rbc":
                self._equivocate.add(name)
            elif c.kind == "garbage_read_replies":
                self._garbage.add(name)
            elif c.kind == "delay":
                self._delay[name] = max(2, c.param or 10)
            elif c.kind == "forge_origin":
                self.forged_origin_ids.add(c.replica_id)

    def is_crashed(self, name: str, now: int) -> bool:
        at = self._crash_at.get(name)
        return at is not None and now >= at

    def delay_factor(self, sender: str, dest: str) -> int:
        return max(self._delay.get(sender, 1), self._delay.get(dest, 1))

    def outbound(self, sender: str, dest: str, msg: M.Message, now: int):
        """Transform (or drop) one outbound message.  Returns the message to
        deliver or None."""
        if self.is_crashed(sender, now):
            return None
        if sender in self._mute:
            return None
        if sender in self._equivocate and isinstance(msg, M.RbcInit):
            if self._dest_index(dest) % 2 == 1:
                return M.RbcInit(
                    epoch=msg.epoch,
                    proposer=msg.proposer,
                    payload=b"<equivocation>" + msg.payload,
                )
        if sender in self._garbage and isinstance(msg, M.ReadResponse):
            return M.ReadResponse(
                h=msg.h,
                status=M.READ_BUNDLE,
                sigma=self.rng.randbytes(max(24, len(msg.sigma) or 24)),
                c_m=b"",
                share=b"",
            )
        return msg

    @staticmethod
    def _dest_index(dest: str) -> int:
        try:
            return int(dest.rsplit("-", 1)[1])
        except (IndexError, ValueError):
            return 0
