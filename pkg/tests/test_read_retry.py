"""The empty-response path: f+1 not-found replies mean tentative absence,
a scheduled retry, and eventual delivery once the value commits."""

import random

from gatedstore.bft import messages as M
from gatedstore.client import RequesterCreds, RequesterNode, StartRead
from gatedstore.crypto import aead, keyfile, pke_encrypt, pke_generate, te_setup
from gatedstore.crypto.engine import DIGEST_CONTEXT
from gatedstore.crypto.subtree import be_build_tree
from gatedstore.crypto.subtree import be_encrypt
from gatedstore.ledger import OnChainRecord
from gatedstore.model import AccessType
from gatedstore.sim.network import SimNetwork
from gatedstore.verifier import VERIFIER_CONTEXT


class Sink:
    def __init__(self):
        self.received = []

    def on_message(self, sender, msg, api):
        self.received.append((sender, msg))


def test_not_found_quorum_triggers_retry_then_success():
    rng = random.Random(0xBEEF)
    net = SimNetwork(seed=1, delay_max=1)

    tree = be_build_tree(4, b"grp")
    bundle = be_encrypt(b"payload", tree, set(), rng)
    sigma = bundle.encode()
    m_h = aead.sha256(b"payload")
    rsa = pke_generate(rng)
    c_h = pke_encrypt(rsa.pk, m_h, DIGEST_CONTEXT, rng)
    verifier_keys = pke_generate(rng)
    te = te_setup(4, 2, rng)

    creds = RequesterCreds(
        abe_attrs=frozenset(), be_leaf=1, be_leaf_keys=tree.leaf_keys(1), te_vk=te.vk
    )
    node = RequesterNode("requester-1", 4, 1, creds, verifier_keys.pk)
    record = OnChainRecord(at=AccessType.BE, c_h=c_h, c_p=b"", owner_id="o", timestamp=0)
    txid = "ab" * 32

    class FlippingReplica:
        """Answers not-found until told otherwise."""

        def __init__(self):
            self.have_data = False

        def on_message(self, sender, msg, api):
            if isinstance(msg, M.ReadRequest):
                if self.have_data:
                    api.send(
                        sender,
                        M.ReadResponse(h=msg.h, status=M.READ_BUNDLE, sigma=sigma, c_m=b"", share=b""),
                    )
                else:
                    api.send(
                        sender,
                        M.ReadResponse(h=msg.h, status=M.READ_NOT_FOUND, sigma=b"", c_m=b"", share=b""),
                    )

    class FakeLedger:
        def on_message(self, sender, msg, api):
            if isinstance(msg, M.LedgerFetch):
                api.send(sender, M.LedgerRecord(txid=msg.txid, found=1, record=record.encode()))

    class FakeVerifier(Sink):
        pass

    class FakeKgc:
        def on_message(self, sender, msg, api):
            if isinstance(msg, M.ReleaseRequest):
                api.send(
                    sender,
                    M.ReleaseResponse(
                        txid=msg.txid,
                        status=M.RELEASE_GRANTED,
                        at=AccessType.BE.value,
                        key=keyfile.encode_pke_secret(rsa.sk),
                    ),
                )

    replicas = [FlippingReplica() for _ in range(4)]
    for i, rep in enumerate(replicas):
        net.add_node(f"replica-{i}", rep)
    net.add_node("ledger", FakeLedger())
    net.add_node("verifier", FakeVerifier())
    net.add_node("kgc", FakeKgc())
    net.add_node("requester-1", node)
    net.add_node("driver", Sink())

    net.apis["driver"].send("requester-1", StartRead(txid=txid))

    # run until the first read round collects its f+1 not-found replies
    def first_round_done():
        sess = node.sessions.get(txid)
        return sess is not None and sess.reads_sent == 1 and len(sess.responses) == 4

    net.run(until=first_round_done)
    sess = node.sessions[txid]
    assert sess.state == "pending"

    # data appears; the already-scheduled retry must pick it up
    for rep in replicas:
        rep.have_data = True
    net.run()
    assert sess.state == "done"
    assert sess.m == b"payload"
    assert sess.reads_sent >= 2
    assert node.delivered == {txid}
