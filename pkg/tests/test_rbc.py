import random

from gatedstore.bft import messages as M
from gatedstore.bft.rbc import Bcast, RbcInstance, Send


def make_instances(n=4, f=1, epoch=0, proposer=0, coded_threshold=64 * 1024):
    return [RbcInstance(n, f, i, epoch, proposer, coded_threshold) for i in range(n)]


def route(instances, actions, me):
    """Deliver every outgoing action synchronously; returns nothing."""
    queue = [(me, a) for a in actions]
    while queue:
        sender, act = queue.pop(0)
        if isinstance(act, Bcast):
            dests = [i for i in range(len(instances)) if i != sender]
        else:
            dests = [act.dest]
        for d in dests:
            out = instances[d].handle(sender, act.msg)
            queue.extend((d, a) for a in out)


def test_all_deliver_same_payload():
    instances = make_instances()
    route(instances, instances[0].start(b"value"), 0)
    assert all(inst.delivered == b"value" for inst in instances)


def test_deliver_needs_2f_plus_1_ready():
    # feed READY messages directly: 2 are not enough, 3 are
    inst = RbcInstance(4, 1, 3, 0, 0)
    inst.handle(0, M.RbcReady(epoch=0, proposer=0, payload=b"v"))
    assert inst.delivered is None
    inst.handle(1, M.RbcReady(epoch=0, proposer=0, payload=b"v"))
    # second READY triggers the f+1 amplification (own READY joins the tally)
    assert inst.delivered == b"v"


def test_two_readys_without_amplification_insufficient():
    inst = RbcInstance(4, 1, 3, 0, 0)
    inst._sent_ready = True  # pretend we already committed to another value
    inst.handle(0, M.RbcReady(epoch=0, proposer=0, payload=b"v"))
    inst.handle(1, M.RbcReady(epoch=0, proposer=0, payload=b"v"))
    assert inst.delivered is None
    inst.handle(2, M.RbcReady(epoch=0, proposer=0, payload=b"v"))
    assert inst.delivered == b"v"


def test_echo_threshold_is_ceil_n_f_1_over_2():
    inst = RbcInstance(4, 1, 1, 0, 0)
    assert inst.echo_threshold == 3


def test_equivocating_init_first_wins_with_evidence():
    inst = RbcInstance(4, 1, 1, 0, 0)
    inst.handle(0, M.RbcInit(epoch=0, proposer=0, payload=b"a"))
    out = inst.handle(0, M.RbcInit(epoch=0, proposer=0, payload=b"b"))
    assert out == []
    assert inst.byzantine_evidence
    assert inst._init_payload == b"a"


def test_init_from_non_proposer_ignored():
    inst = RbcInstance(4, 1, 1, 0, 0)
    inst.handle(2, M.RbcInit(epoch=0, proposer=0, payload=b"evil"))
    assert inst._init_payload is None
    assert inst.byzantine_evidence


def test_coded_path_roundtrip_large_payload():
    rng = random.Random(0)
    payload = rng.randbytes(200_000)
    instances = make_instances(coded_threshold=64 * 1024)
    route(instances, instances[0].start(payload), 0)
    assert all(inst.delivered == payload for inst in instances)


def test_coded_path_sends_val_per_replica():
    rng = random.Random(1)
    payload = rng.randbytes(100_000)
    inst = RbcInstance(4, 1, 0, 0, 0)
    out = inst.start(payload)
    vals = [a for a in out if isinstance(a, Send) and isinstance(a.msg, M.RbcVal)]
    assert sorted(a.dest for a in vals) == [1, 2, 3]


def test_small_payload_stays_plain():
    inst = RbcInstance(4, 1, 0, 0, 0)
    out = inst.start(b"small")
    assert any(isinstance(a, Bcast) and isinstance(a.msg, M.RbcInit) for a in out)
