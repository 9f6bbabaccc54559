"""Asynchronous binary agreement with a common coin.

Round structure: binary-value broadcast (BVAL with f+1 echo and 2f+1
admission thresholds), one AUX vote per round, then a coin flip.  A replica
decides when the surviving value set is a singleton matching the coin.
Deciders announce via DECIDED messages: f+1 announcements let a replica
adopt the decision, 2f+1 let it halt, so nobody stalls waiting for peers
that finished early.

The coin is injected as ``coin(round) -> 0|1``.  In simulation it is a
keyed PRF over (epoch, instance, round) held by the scheduler -- a test
double for a threshold-signature coin, which is the production interface.
"""

from __future__ import annotations

from collections import defaultdict

from . import messages as M
from .rbc import Bcast


class AbaInstance:
    def __init__(self, n: int, f: int, me: int, epoch: int, index: int, coin):
        self.n, self.f, self.me = n, f, me
        self.epoch, self.index = epoch, index
        self.coin = coin
        self.decided: int | None = None
        self.halted = False
        self.input_bit: int | None = None
        self.round = 0
        self.est: int | None = None
        self._bval_sent: dict[int, set[int]] = defaultdict(set)  # round -> bits
        self._bval_recv: dict[tuple[int, int], set[int]] = defaultdict(set)
        self._bin_values: dict[int, list[int]] = defaultdict(list)  # insertion order
        self._aux_sent: dict[int, int] = {}
        self._aux_recv: dict[int, dict[int, int]] = defaultdict(dict)
        self._decided_recv: dict[int, set[int]] = defaultdict(set)
        self._decided_sent = False
        self._round_completed: set[int] = set()

    # ------------------------------------------------------------------

    def input(self, b: int) -> list:
        assert b in (0, 1)
        if self.input_bit is not None or self.halted:
            return []
        self.input_bit = b
        self.est = b
        self.round = 1
        out = self._broadcast_bval(1, b)
        out.extend(self._progress())
        return out

    def handle(self, sender: int, msg: M.Message) -> list:
        if self.halted:
            return []
        if isinstance(msg, M.AbaBval):
            self._bval_recv[(msg.round, msg.bit)].add(sender)
        elif isinstance(msg, M.AbaAux):
            self._aux_recv[msg.round].setdefault(sender, msg.bit)
        elif isinstance(msg, M.AbaDecided):
            self._decided_recv[msg.bit].add(sender)
        else:
            return []
        return self._progress()

    # ------------------------------------------------------------------

    def _broadcast_bval(self, rnd: int, b: int) -> list:
        self._bval_sent[rnd].add(b)
        self._bval_recv[(rnd, b)].add(self.me)
        return [Bcast(M.AbaBval(epoch=self.epoch, index=self.index, round=rnd, bit=b))]

    def _broadcast_aux(self, rnd: int, b: int) -> list:
        self._aux_sent[rnd] = b
        self._aux_recv[rnd].setdefault(self.me, b)
        return [Bcast(M.AbaAux(epoch=self.epoch, index=self.index, round=rnd, bit=b))]

    def _decide(self, b: int) -> list:
        out = []
        if self.decided is None:
            self.decided = b
        if not self._decided_sent:
            self._decided_sent = True
            self._decided_recv[b].add(self.me)
            out.append(Bcast(M.AbaDecided(epoch=self.epoch, index=self.index, bit=b)))
        return out

    def _progress(self) -> list:
        out: list = []
        changed = True
        while changed and not self.halted:
            changed = False

            # decision adoption and halting
            for b in (0, 1):
                votes = len(self._decided_recv[b])
                if votes >= self.f + 1 and self.decided is None:
                    out.extend(self._decide(b))
                    changed = True
                if votes >= 2 * self.f + 1:
                    self.halted = True
                    return out

            # BVAL echo and admission, any round
            for (rnd, b), senders in list(self._bval_recv.items()):
                if len(senders) >= self.f + 1 and b not in self._bval_sent[rnd]:
                    out.extend(self._broadcast_bval(rnd, b))
                    changed = True
                if len(senders) >= 2 * self.f + 1 and b not in self._bin_values[rnd]:
                    self._bin_values[rnd].append(b)
                    changed = True

            if self.input_bit is None or self.round == 0:
                continue
            rnd = self.round
            if rnd in self._round_completed:
                continue

            bin_vals = self._bin_values[rnd]
            if bin_vals and rnd not in self._aux_sent:
                out.extend(self._broadcast_aux(rnd, bin_vals[0]))
                changed = True

            if rnd in self._aux_sent:
                good = [b for s, b in self._aux_recv[rnd].items() if b in bin_vals]
                if len(good) >= self.n - self.f:
                    vals = sorted(set(good))
                    s = self.coin(rnd)
                    if len(vals) == 1:
                        self.est = vals[0]
                        if vals[0] == s and self.decided is None:
                            out.extend(self._decide(s))
                    else:
                        self.est = s
                    self._round_completed.add(rnd)
                    self.round = rnd + 1
                    out.extend(self._broadcast_bval(self.round, self.est))
                    changed = True
        return out
