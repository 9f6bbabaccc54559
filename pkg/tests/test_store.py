import pytest

from gatedstore.bft.store import StoreEntry, StoreLog
from gatedstore.model import AccessType


def entry(i: int, sigma: bytes = b"sigma") -> StoreEntry:
    return StoreEntry(h=bytes([i]) * 32, sigma=sigma, at=AccessType.BE, epoch=0, slot=i)


def test_entry_codec_roundtrip():
    e = entry(3, b"payload-bytes")
    assert StoreEntry.decode(e.encode()) == e


def test_first_commit_wins():
    log = StoreLog()
    assert log.append(entry(1, b"first"))
    assert not log.append(entry(1, b"second"))
    assert log.get(bytes([1]) * 32).sigma == b"first"
    assert len(log.entries) == 1


def test_replay_rebuilds_index(tmp_path):
    path = tmp_path / "store.log"
    log = StoreLog(path)
    for i in range(5):
        log.append(entry(i, b"v%d" % i))
    log.close()
    replayed = StoreLog.replay(path)
    assert len(replayed.entries) == 5
    for i in range(5):
        assert replayed.get(bytes([i]) * 32).sigma == b"v%d" % i
    # appends continue after replay
    replayed.append(entry(9))
    replayed.close()
    again = StoreLog.replay(path)
    assert len(again.entries) == 6


def test_corrupt_store_alarm():
    from conftest import build_cluster, make_tx, submit
    from gatedstore.bft import messages as M

    net, replicas, collector = build_cluster(seed=31)
    tx = make_tx(0)
    submit(net, tx, to_replica=0)
    net.run()
    # corrupt replica-0's stored value in place
    entry0 = replicas[0].store.get(tx.h)
    replicas[0].store._index[tx.h] = StoreEntry(
        h=entry0.h, sigma=b"\xff\xfe", at=entry0.at, epoch=entry0.epoch, slot=entry0.slot
    )
    net.apis["owner-0"].send("replica-0", M.ReadRequest(h=tx.h))
    net.run()
    alarms = [ev for ev in net.trace if ev.kind == "corrupt_store"]
    assert alarms, "corrupt stored value must raise an alarm"
    _, resp = collector.reads[tx.h][0]
    assert resp.status == M.READ_NOT_FOUND
