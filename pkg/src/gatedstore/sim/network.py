"""Deterministic discrete-event network.

Every message is assigned a bounded pseudo-random delay when sent; the
scheduler always delivers the lowest-timestamped message next, breaking
ties by sequence number.  Delays are finite, so every sent message is
eventually delivered (fairness is structural) while the seed still
exercises wildly different interleavings.  A constant-delay configuration
degenerates to a synchronous network.

One node processes one message at a time; all randomness -- scheduling,
adversary and node-local crypto randomness -- derives from the run seed,
so a (config, seed) pair replays to a byte-identical trace.
"""

from __future__ import annotations

import hashlib
import heapq
import hmac
import random
import struct
from dataclasses import dataclass

from ..bft import messages as M
from ..errors import GatedStoreError
from .adversary import Adversary, AdversarySpec


def derive_rng(seed: int, name: str) -> random.Random:
    digest = hmac.new(
        seed.to_bytes(8, "big", signed=False), name.encode(), hashlib.sha256
    ).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


class PrfCoin:
    """Common coin as a keyed PRF over (epoch, instance, round); held by
    the scheduler, queried by replicas through this handle."""

    def __init__(self, seed: int):
        self._key = hashlib.sha256(b"coin|%d" % seed).digest()

    def __call__(self, epoch: int, index: int, rnd: int) -> int:
        mac = hmac.new(self._key, struct.pack(">QHI", epoch, index, rnd), hashlib.sha256)
        return mac.digest()[0] & 1


@dataclass
class TraceEvent:
    t: int
    seq: int
    kind: str  # "deliver" | "drop" | domain event name
    sender: str
    dest: str
    info: str

    def line(self) -> str:
        return f"{self.t}|{self.seq}|{self.kind}|{self.sender}|{self.dest}|{self.info}"


class NodeApi:
    """Per-node capability handle: sending, timers, tracing, randomness."""

    __slots__ = ("_net", "name", "rng", "now")

    def __init__(self, net: "SimNetwork", name: str, rng: random.Random):
        self._net = net
        self.name = name
        self.rng = rng
        self.now = 0

    def send(self, dest: str, msg: M.Message) -> None:
        self._net._send(self.name, dest, msg)

    def set_timer(self, delay: int, timer: M.Timer) -> None:
        self._net._schedule(self.name, self.name, timer, max(1, delay))

    def trace(self, kind: str, **fields) -> None:
        self._net.record(kind, self.name, fields)


class SimNetwork:
    def __init__(
        self,
        seed: int,
        adversary: AdversarySpec | None = None,
        delay_max: int = 8,
        trace_payloads: bool = True,
    ):
        self.seed = seed
        self.rng = derive_rng(seed, "network")
        self.coin = PrfCoin(seed)
        self.adversary = Adversary(adversary or AdversarySpec(), derive_rng(seed, "adversary"))
        self.delay_max = max(1, delay_max)
        self.trace_payloads = trace_payloads
        self.nodes: dict[str, object] = {}
        self.apis: dict[str, NodeApi] = {}
        # heap entries: (deliver_t, seq, dest, sender, msg, sent_t)
        self._heap: list[tuple[int, int, str, str, M.Message, int]] = []
        self._seq = 0
        self.now = 0
        self.steps = 0
        self.trace: list[TraceEvent] = []
        self.max_observed_age = 0
        self.deliver_hook = None  # optional (sender, dest, msg) tap for tests

    # ------------------------------------------------------------------

    def add_node(self, name: str, node) -> NodeApi:
        if name in self.nodes:
            raise GatedStoreError(f"duplicate node {name}")
        self.nodes[name] = node
        api = NodeApi(self, name, derive_rng(self.seed, f"node|{name}"))
        self.apis[name] = api
        return api

    def _schedule(self, sender: str, dest: str, msg: M.Message, delay: int) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (self.now + delay, self._seq, dest, sender, msg, self.now))

    def _send(self, sender: str, dest: str, msg: M.Message) -> None:
        if dest not in self.nodes:
            raise GatedStoreError(f"send to unknown node {dest}")
        out = self.adversary.outbound(sender, dest, msg, self.now)
        if out is None:
            self.record("drop", sender, {"dest": dest, "msg": type(msg).__name__})
            return
        delay = self.rng.randint(1, self.delay_max) * self.adversary.delay_factor(sender, dest)
        self._schedule(sender, dest, out, delay)

    # ------------------------------------------------------------------

    def record(self, kind: str, node: str, fields: dict) -> None:
        info = ",".join(f"{k}={fields[k]}" for k in sorted(fields))
        self.trace.append(
            TraceEvent(t=self.now, seq=self._seq, kind=kind, sender=node, dest="", info=info)
        )

    def _record_delivery(self, t: int, seq: int, sender: str, dest: str, msg: M.Message) -> None:
        info = M.summary(msg) if self.trace_payloads else type(msg).__name__
        self.trace.append(TraceEvent(t=t, seq=seq, kind="deliver", sender=sender, dest=dest, info=info))

    def run(self, max_steps: int = 5_000_000, until=None) -> None:
        """Drive the event loop until quiescence, ``until()`` turns true, or
        the step budget runs out."""
        while self._heap:
            if self.steps >= max_steps:
                raise GatedStoreError(f"step budget exhausted after {self.steps} steps")
            t, seq, dest, sender, msg, sent_t = heapq.heappop(self._heap)
            self.now = max(self.now, t)
            self.steps += 1
            if not isinstance(msg, M.Timer):
                age = t - sent_t
                if age > self.max_observed_age:
                    self.max_observed_age = age
            if self.adversary.is_crashed(dest, self.now):
                if not isinstance(msg, M.Timer):
                    self.record(
                        "drop", sender, {"dest": dest, "msg": type(msg).__name__, "reason": "crashed"}
                    )
                continue
            self._record_delivery(t, seq, sender, dest, msg)
            if self.deliver_hook is not None:
                self.deliver_hook(sender, dest, msg)
            api = self.apis[dest]
            api.now = self.now
            self.nodes[dest].on_message(sender, msg, api)
            if until is not None and until():
                return

    def pending_count(self) -> int:
        return len(self._heap)

    def trace_hash(self) -> str:
        h = hashlib.sha256()
        for ev in self.trace:
            h.update(ev.line().encode())
            h.update(b"\n")
        return h.hexdigest()

    def trace_lines(self) -> list[str]:
        return [ev.line() for ev in self.trace]
