import heapq
import random

from gatedstore.bft.aba import AbaInstance
from gatedstore.bft.rbc import Bcast
from gatedstore.sim.network import PrfCoin


def run_instances(n, f, inputs, seed, byzantine=None, max_events=100_000):
    """Drive n agreement instances over a randomized schedule.

    ``inputs[i] is None`` leaves replica i without input (it still echoes).
    ``byzantine`` is a set of replica ids whose outbound messages are dropped
    (mute faults).  Returns the list of decisions.
    """
    coin = PrfCoin(seed)
    rng = random.Random(seed * 31 + 7)
    insts = [AbaInstance(n, f, i, 0, 0, lambda r: coin(0, 0, r)) for i in range(n)]
    heap = []
    seq = 0

    def emit(sender, actions):
        nonlocal seq
        if byzantine and sender in byzantine:
            return
        for act in actions:
            assert isinstance(act, Bcast)
            for dest in range(n):
                if dest != sender:
                    seq += 1
                    heapq.heappush(heap, (rng.randint(1, 50), seq, dest, sender, act.msg))

    for i, b in enumerate(inputs):
        if b is not None:
            emit(i, insts[i].input(b))

    events = 0
    while heap and events < max_events:
        _, _, dest, sender, msg = heapq.heappop(heap)
        events += 1
        emit(dest, insts[dest].handle(sender, msg))
    return [inst.decided for inst in insts]


def test_unanimous_one_decides_one():
    for seed in range(10):
        assert run_instances(4, 1, [1, 1, 1, 1], seed) == [1, 1, 1, 1]


def test_unanimous_zero_decides_zero():
    for seed in range(10):
        assert run_instances(4, 1, [0, 0, 0, 0], seed) == [0, 0, 0, 0]


def test_validity_with_one_mute_fault():
    for seed in range(10):
        decisions = run_instances(4, 1, [1, 1, 1, None], seed, byzantine={3})
        assert decisions[:3] == [1, 1, 1]


def test_mixed_inputs_agree_across_500_seeds():
    # simulation oracle: adversarial scheduling via random delays, one mute
    # replica, mixed inputs; all correct replicas must decide identically
    for seed in range(500):
        rng = random.Random(seed)
        inputs = [rng.randint(0, 1) for _ in range(4)]
        mute = {rng.randrange(4)} if rng.random() < 0.5 else None
        decisions = run_instances(4, 1, inputs, seed, byzantine=mute)
        correct = [d for i, d in enumerate(decisions) if not (mute and i in mute)]
        assert all(d is not None for d in correct), (seed, decisions)
        assert len(set(correct)) == 1, (seed, decisions)


def test_late_messages_absorbed_after_halt():
    from gatedstore.bft import messages as M

    insts = [None]
    coin = PrfCoin(1)
    inst = AbaInstance(4, 1, 0, 0, 0, lambda r: coin(0, 0, r))
    inst.input(1)
    # three peers announce a decision: adopt on f+1, halt on 2f+1
    inst.handle(1, M.AbaDecided(epoch=0, index=0, bit=1))
    inst.handle(2, M.AbaDecided(epoch=0, index=0, bit=1))
    assert inst.decided == 1
    inst.handle(3, M.AbaDecided(epoch=0, index=0, bit=1))
    assert inst.halted
    assert inst.handle(1, M.AbaBval(epoch=0, index=0, round=5, bit=0)) == []


def test_decision_stable_once_made():
    for seed in range(50):
        rng = random.Random(seed ^ 0xA5A5)
        inputs = [rng.randint(0, 1) for _ in range(4)]
        decisions = run_instances(4, 1, inputs, seed)
        assert all(d in (0, 1) for d in decisions)
        assert len(set(decisions)) == 1
