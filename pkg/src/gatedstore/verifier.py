"""Trusted verifier: decrypts the owner's policy and the requester's claimed
credential under its own keypair, checks that access types agree and the
credential satisfies the policy, and reports the verdict to the key center.

Runs as a separate trusted process with a static trust assumption standing
in for enclave attestation.  The decryption key never leaves this module:
no message or API returns it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bft import messages as M
from .crypto.hybridpke import PkeSecretKey, pke_decrypt
from .crypto.lsss import evaluate, parse_formula
from .errors import CodecError, KeyMismatch, PolicySyntaxError
from .model import AccessType, PartialAttribute, Policy

VERIFIER_CONTEXT = b"verifier"


def satisfies(policy: Policy, pu: PartialAttribute) -> bool:
    """Does the claimed credential satisfy the policy?  Tag mismatch is an
    automatic no."""
    if policy.tag != pu.tag:
        return False
    if policy.tag == AccessType.ABE:
        try:
            return evaluate(parse_formula(policy.abe_formula), pu.abe_attrs)
        except PolicySyntaxError:
            return False
    if policy.tag == AccessType.BE:
        return pu.be_leaf_index in policy.eligible_leaves()
    return pu.te_identity in policy.te_authorized


@dataclass
class VerificationSession:
    txid: str
    requester_id: str
    at_b: AccessType | None = None
    c_p: bytes | None = None
    at_d: AccessType | None = None
    c_pu: bytes | None = None
    res: bool = False
    done: bool = False


class Verifier:
    """One verification session per (txid, requester); results are cached
    for the lifetime of the run."""

    def __init__(self, sk_v: PkeSecretKey, kgc_name: str = "kgc", ledger_name: str = "ledger"):
        self._sk_v = sk_v
        self.kgc_name = kgc_name
        self.ledger_name = ledger_name
        self.sessions: dict[tuple[str, str], VerificationSession] = {}
        self.audit_log: list[dict] = []

    # Pure check, usable without the message plumbing.
    def verify_pair(self, at_b: AccessType, c_p: bytes, at_d: AccessType, c_pu: bytes) -> tuple[bool, str]:
        try:
            policy = Policy.decode(pke_decrypt(self._sk_v, c_p, VERIFIER_CONTEXT))
            pu = PartialAttribute.decode(pke_decrypt(self._sk_v, c_pu, VERIFIER_CONTEXT))
        except (KeyMismatch, CodecError, PolicySyntaxError) as exc:
            return False, f"DECRYPT_FAIL: {exc}"
        if at_b != at_d:
            return False, "access type mismatch"
        if policy.tag != at_b:
            return False, "policy tag disagrees with on-chain access type"
        return satisfies(policy, pu), "checked"

    # ------------------------------------------------------------------

    def _session(self, txid: str, requester: str) -> VerificationSession:
        key = (txid, requester)
        sess = self.sessions.get(key)
        if sess is None:
            sess = self.sessions[key] = VerificationSession(txid=txid, requester_id=requester)
        return sess

    def on_message(self, sender: str, msg: M.Message, api) -> None:
        if isinstance(msg, M.VerifyRequest):
            sess = self._session(msg.txid, sender)
            if sess.done:
                self._report(sess, api)  # idempotent re-report from cache
                return
            sess.at_d = AccessType.from_byte(msg.at) if msg.at else None
            sess.c_pu = msg.c_pu
            # pull the owner's half from the chain
            api.send(self.ledger_name, M.LedgerPolicyPull(txid=msg.txid, requester=sender))
        elif isinstance(msg, M.LedgerPolicy):
            sess = self._session(msg.txid, msg.requester)
            if sess.done:
                return
            if not msg.found:
                # session never opens for a missing txid
                self.sessions.pop((msg.txid, msg.requester), None)
                api.trace("verify_no_record", txid=msg.txid, requester=msg.requester)
                return
            sess.at_b = AccessType.from_byte(msg.at)
            sess.c_p = msg.c_p
            self._maybe_finish(sess, api)

    def _maybe_finish(self, sess: VerificationSession, api) -> None:
        if sess.at_b is None or sess.c_pu is None or sess.at_d is None:
            return
        res, reason = self.verify_pair(sess.at_b, sess.c_p, sess.at_d, sess.c_pu)
        sess.res = res
        sess.done = True
        self.audit_log.append(
            {
                "timestamp": api.now,
                "txid": sess.txid,
                "requester": sess.requester_id,
                "res": res,
                "reason": reason,
            }
        )
        api.trace("verify_result", txid=sess.txid, requester=sess.requester_id, res=int(res))
        self._report(sess, api)

    def _report(self, sess: VerificationSession, api) -> None:
        api.send(
            self.kgc_name,
            M.VerifierReport(txid=sess.txid, requester=sess.requester_id, res=int(sess.res)),
        )
