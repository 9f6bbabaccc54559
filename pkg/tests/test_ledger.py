import pytest

from gatedstore.errors import GatedStoreError, NotFound
from gatedstore.ledger import Chain, OnChainRecord
from gatedstore.model import AccessType


def make_record(i: int = 0, owner: str = "owner-0") -> OnChainRecord:
    return OnChainRecord(
        at=AccessType.TE,
        c_h=b"ch-%d" % i,
        c_p=b"cp-%d" % i,
        owner_id=owner,
        timestamp=i,
    )


@pytest.fixture
def chain():
    c = Chain()
    c.register_owner("owner-0")
    return c


def test_record_codec_roundtrip():
    rec = make_record(7)
    assert OnChainRecord.decode(rec.encode()) == rec


def test_submit_fetch_roundtrip(chain):
    rec = make_record()
    txid = chain.submit(rec)
    assert chain.fetch(txid) == rec
    assert txid == txid.lower() and len(txid) == 64


def test_identical_content_distinct_txids(chain):
    rec = make_record()
    assert chain.submit(rec) != chain.submit(rec)


def test_unknown_txid(chain):
    with pytest.raises(NotFound):
        chain.fetch("00" * 32)


def test_unregistered_owner_rejected(chain):
    with pytest.raises(GatedStoreError):
        chain.submit(make_record(owner="stranger"))


def test_chain_verifies_then_detects_tamper(chain):
    for i in range(5):
        chain.submit(make_record(i))
    assert chain.verify()
    block = chain.blocks[2]
    chain.blocks[2] = type(block)(
        prev_hash=block.prev_hash, record=block.record[:-1] + b"\x00", block_hash=block.block_hash
    )
    assert not chain.verify()


def test_bulk_thousand_roundtrip(chain):
    txids = [chain.submit(make_record(i)) for i in range(1000)]
    assert len(set(txids)) == 1000
    for i, txid in enumerate(txids):
        assert chain.fetch(txid).c_h == b"ch-%d" % i
    assert chain.verify()


def test_append_only_persistence(tmp_path):
    path = tmp_path / "chain.log"
    chain = Chain(path)
    chain.register_owner("owner-0")
    t1 = chain.submit(make_record(1))
    t2 = chain.submit(make_record(2))
    chain.close()
    replayed = Chain.replay(path, {"owner-0"})
    assert replayed.verify()
    assert replayed.fetch(t1).c_h == b"ch-1"
    assert replayed.fetch(t2).c_h == b"ch-2"
