"""Reliability property suite, evaluated on a finished run.

The five replication goals (agreement, total order, liveness,
authentication, uniqueness) are computed from the trace records alone;
integrity and gate ordering come from the client-facing events; byte-level
cross-checks against node state back the trace-level verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class Verdict:
    name: str
    passed: bool
    details: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (
            f"  ({self.details})" if self.details else ""
        )


def _correct_replicas(system) -> list[str]:
    corrupt = {f"replica-{i}" for i in system.net.adversary.spec.corrupt_ids()}
    return [r.node_name() for r in system.replicas if r.node_name() not in corrupt]


def _commit_logs(system) -> dict[str, list[tuple[int, int, str]]]:
    logs: dict[str, list[tuple[int, int, str]]] = {}
    for ev in system.net.trace:
        if ev.kind == "tx_commit":
            fields = dict(f.split("=", 1) for f in ev.info.split(","))
            logs.setdefault(ev.sender, []).append(
                (int(fields["epoch"]), int(fields["slot"]), fields["h"])
            )
    return logs


def _domain_events(system, kind: str) -> list:
    out = []
    for ev in system.net.trace:
        if ev.kind == kind:
            fields = dict(f.split("=", 1) for f in ev.info.split(","))
            out.append((ev.sender, ev.t, ev.seq, fields))
    return out


def check_agreement_total_order(system) -> Verdict:
    logs = _commit_logs(system)
    correct = _correct_replicas(system)
    seqs = [logs.get(name, []) for name in correct]
    for i in range(len(seqs)):
        for j in range(i + 1, len(seqs)):
            a, b = seqs[i], seqs[j]
            k = min(len(a), len(b))
            if a[:k] != b[:k]:
                return Verdict(
                    "agreement_total_order",
                    False,
                    f"{correct[i]} and {correct[j]} diverge within the first {k} commits",
                )
    lengths = {len(s) for s in seqs}
    return Verdict("agreement_total_order", True, f"lengths={sorted(lengths)}")


def check_liveness(system) -> Verdict:
    starts = {f[3]["h"] for f in _domain_events(system, "owner_write_start")}
    dones = {f[3]["h"] for f in _domain_events(system, "owner_write_done")}
    missing = starts - dones
    if missing:
        return Verdict("liveness", False, f"{len(missing)} writes never completed")
    logs = _commit_logs(system)
    for name in _correct_replicas(system):
        committed = {h for (_, _, h) in logs.get(name, [])}
        gap = starts - committed
        if gap:
            return Verdict("liveness", False, f"{name} missing {len(gap)} committed writes")
    return Verdict("liveness", True, f"{len(starts)} writes committed everywhere")


def check_uniqueness(system) -> Verdict:
    logs = _commit_logs(system)
    for name, entries in logs.items():
        slots = [(e, s) for (e, s, _) in entries]
        if len(slots) != len(set(slots)):
            return Verdict("uniqueness", False, f"{name} repeats an (epoch, slot)")
        hashes = [h for (_, _, h) in entries]
        if len(hashes) != len(set(hashes)):
            return Verdict("uniqueness", False, f"{name} commits one key twice")
    deliveries: dict[tuple[str, str], int] = {}
    for sender, _, _, fields in _domain_events(system, "m_delivered"):
        key = (sender, fields["txid"])
        deliveries[key] = deliveries.get(key, 0) + 1
    dup = [k for k, v in deliveries.items() if v > 1]
    if dup:
        return Verdict("uniqueness", False, f"duplicate deliveries: {dup[:3]}")
    # state-level cross-check: stored values for one key never conflict
    by_h: dict[str, bytes] = {}
    for rep in system.replicas:
        for entry in rep.store.entries:
            h = entry.h.hex()
            if h in by_h and by_h[h] != entry.sigma:
                return Verdict("uniqueness", False, f"conflicting stored value for {h[:12]}")
            by_h[h] = entry.sigma
    return Verdict("uniqueness", True)


def check_authentication(system) -> Verdict:
    published = {f[3]["h"] for f in _domain_events(system, "owner_write_start")}
    logs = _commit_logs(system)
    for name, entries in logs.items():
        foreign = {h for (_, _, h) in entries} - published
        if foreign:
            return Verdict(
                "authentication", False, f"{name} committed {len(foreign)} unpublished keys"
            )
    # byte-level: committed content equals what the owner produced
    sigma_by_h = {}
    for owner in system.owners.values():
        for h, sess in owner.sessions.items():
            sigma_by_h[h] = sess.sigma
    for rep in system.replicas:
        for entry in rep.store.entries:
            want = sigma_by_h.get(entry.h)
            if want is not None and want != entry.sigma:
                return Verdict("authentication", False, "stored value differs from published")
    return Verdict("authentication", True)


def check_read_outcomes(system) -> Verdict:
    expected = system.driver.expected
    outcomes = system.driver.read_outcomes
    for key, want in expected.items():
        got = outcomes.get(key)
        if got != want:
            return Verdict(
                "read_outcomes", False, f"{key[0]} on {key[1][:12]}: expected {want}, got {got}"
            )
    return Verdict("read_outcomes", True, f"{len(expected)} sessions as expected")


def check_gate_ordering(system) -> Verdict:
    key_seq: dict[tuple[str, str], int] = {}
    for sender, _, seq, fields in _domain_events(system, "key_received"):
        key_seq[(sender, fields["txid"])] = seq
    for sender, _, seq, fields in _domain_events(system, "read_broadcast"):
        k = (sender, fields["txid"])
        if k not in key_seq or seq < key_seq[k]:
            return Verdict("gate_ordering", False, f"{sender} read before key release on {k[1][:12]}")
    denied = {k for k, v in system.driver.read_outcomes.items() if v == "access_denied"}
    for sender, _, _, fields in _domain_events(system, "read_broadcast"):
        if (sender, fields["txid"]) in denied:
            return Verdict("gate_ordering", False, f"denied session {sender} issued reads")
    return Verdict("gate_ordering", True)


def check_integrity(system) -> Verdict:
    h_by_txid = {txid: h.hex() for txid, h in system.driver.writes_done.items()}
    for sender, _, _, fields in _domain_events(system, "m_delivered"):
        want = h_by_txid.get(fields["txid"])
        if want is not None and fields["h"] != want:
            return Verdict("integrity", False, f"{sender} delivered a foreign digest")
    # byte-level: delivered plaintext equals the original payload
    for node in system.requesters.values():
        for txid, sess in node.sessions.items():
            if sess.m is not None:
                original = system.driver.m_by_h.get(sess.h)
                if original is not None and original != sess.m:
                    return Verdict("integrity", False, f"{node.identity} holds wrong bytes")
    fails = _domain_events(system, "integrity_fail")
    return Verdict("integrity", True, f"{len(fails)} tamper aborts" if fails else "")


def check_no_deadlock(system) -> Verdict:
    if system.net.pending_count() != 0:
        return Verdict("no_deadlock", False, f"{system.net.pending_count()} messages stranded")
    stuck = []
    for node in system.requesters.values():
        for txid, sess in node.sessions.items():
            if sess.state == "pending":
                stuck.append((node.identity, txid))
    if stuck:
        return Verdict("no_deadlock", False, f"unfinished read sessions: {stuck[:3]}")
    return Verdict("no_deadlock", True)


ALL_CHECKS = (
    check_agreement_total_order,
    check_liveness,
    check_uniqueness,
    check_authentication,
    check_read_outcomes,
    check_gate_ordering,
    check_integrity,
    check_no_deadlock,
)


def evaluate(system) -> list[Verdict]:
    return [check(system) for check in ALL_CHECKS]
