import random

import pytest

from gatedstore.crypto import (
    AbeReadKey,
    BeReadKey,
    OwnerWriteKeys,
    TeReadKey,
    abe_keygen,
    abe_setup,
    be_build_tree,
    decrypt_get_hash,
    pke_generate,
    read_engine,
    te_setup,
    te_share_dec,
    write_engine,
)
from gatedstore.crypto import aead
from gatedstore.crypto.te import TeCiphertext
from gatedstore.errors import (
    AccessDenied,
    EmptyAudience,
    KeyMismatch,
    TagMismatch,
)
from gatedstore.model import AccessType, CipherBundle, Policy


@pytest.fixture(scope="module")
def setup():
    rng = random.Random(0xE06)
    abe = abe_setup(128, rng)
    tree = be_build_tree(8, b"group-seed")
    te = te_setup(4, 2, rng)
    rsa = pke_generate(rng)
    keys = OwnerWriteKeys(abe_pk=abe.pk, be_tree=tree, te_pk=te.pk, rsa_pk=rsa.pk)
    return abe, tree, te, rsa, keys


def _te_policy(label=b"label-1"):
    return Policy(tag=AccessType.TE, te_label=label, te_authorized=frozenset({"req-1"}))


def test_te_smoke_250_bytes(setup):
    abe, tree, te, rsa, keys = setup
    rng = random.Random(1)
    m = rng.randbytes(250)
    res = write_engine(m, AccessType.TE, _te_policy(), keys, rng)
    bundle = CipherBundle.decode(res.bundle.encode())
    assert bundle.tag == AccessType.TE
    ct = TeCiphertext.decode(te.pk.group(), bundle.x)
    shares = [te_share_dec(s, ct, b"label-1", rng) for s in te.shares[:2]]
    out = read_engine(bundle, TeReadKey(vk=te.vk, label=b"label-1", shares=tuple(shares)))
    assert out == m
    assert decrypt_get_hash(AccessType.TE, rsa.sk, res.c_h) == aead.sha256(m)


def test_empty_message_anchors_empty_hash(setup):
    _, _, _, rsa, keys = setup
    rng = random.Random(2)
    res = write_engine(b"", AccessType.TE, _te_policy(), keys, rng)
    assert decrypt_get_hash(AccessType.TE, rsa.sk, res.c_h) == aead.sha256(b"")


def test_tag_mismatch_rejected(setup):
    *_, keys = setup
    with pytest.raises(TagMismatch):
        write_engine(b"m", AccessType.ABE, _te_policy(), keys, random.Random(3))


def test_abe_path_roundtrip(setup):
    abe, *_, keys = setup
    rng = random.Random(4)
    policy = Policy(tag=AccessType.ABE, abe_formula="Role_Doctor AND Dept_Cardio")
    res = write_engine(b"patient file", AccessType.ABE, policy, keys, rng)
    sk = abe_keygen(abe, {"Role_Doctor", "Dept_Cardio"}, rng)
    assert read_engine(res.bundle, AbeReadKey(sk=sk)) == b"patient file"
    assert decrypt_get_hash(AccessType.ABE, sk, res.c_h) == aead.sha256(b"patient file")


def test_abe_nonsatisfying_denied(setup):
    abe, *_, keys = setup
    rng = random.Random(5)
    policy = Policy(tag=AccessType.ABE, abe_formula="A AND B")
    res = write_engine(b"m", AccessType.ABE, policy, keys, rng)
    sk = abe_keygen(abe, {"A"}, rng)
    with pytest.raises(AccessDenied):
        read_engine(res.bundle, AbeReadKey(sk=sk))


def test_be_path_roundtrip_and_revoked(setup):
    _, tree, _, rsa, keys = setup
    rng = random.Random(6)
    policy = Policy(tag=AccessType.BE, be_group_size=8, be_revoked=frozenset({0}))
    res = write_engine(b"broadcast", AccessType.BE, policy, keys, rng)
    ok = read_engine(res.bundle, BeReadKey(leaf_keys=tree.leaf_keys(1), leaf_index=1))
    assert ok == b"broadcast"
    with pytest.raises(AccessDenied):
        read_engine(res.bundle, BeReadKey(leaf_keys=tree.leaf_keys(0), leaf_index=0))
    assert decrypt_get_hash(AccessType.BE, rsa.sk, res.c_h) == aead.sha256(b"broadcast")


def test_be_all_revoked_refused(setup):
    *_, keys = setup
    policy = Policy(tag=AccessType.BE, be_group_size=8, be_revoked=frozenset(range(8)))
    with pytest.raises(EmptyAudience):
        write_engine(b"m", AccessType.BE, policy, keys, random.Random(7))


def test_read_engine_key_variant_mismatch(setup):
    abe, tree, *_ , keys = setup
    rng = random.Random(8)
    policy = Policy(tag=AccessType.ABE, abe_formula="A")
    res = write_engine(b"m", AccessType.ABE, policy, keys, rng)
    with pytest.raises(TagMismatch):
        read_engine(res.bundle, BeReadKey(leaf_keys=tree.leaf_keys(0), leaf_index=0))


def test_decrypt_get_hash_wrong_key_variant(setup):
    abe, _, _, rsa, keys = setup
    rng = random.Random(9)
    policy = Policy(tag=AccessType.BE, be_group_size=8, be_revoked=frozenset())
    res = write_engine(b"m", AccessType.BE, policy, keys, rng)
    sk = abe_keygen(abe, {"A"}, rng)
    with pytest.raises(KeyMismatch):
        decrypt_get_hash(AccessType.BE, sk, res.c_h)


def test_decrypt_get_hash_foreign_rsa_key(setup):
    *_, keys = setup
    rng = random.Random(10)
    res = write_engine(b"m", AccessType.TE, _te_policy(), keys, rng)
    other = pke_generate(random.Random(11))
    with pytest.raises(KeyMismatch):
        decrypt_get_hash(AccessType.TE, other.sk, res.c_h)


def test_tampered_digest_never_silently_wrong(setup):
    # tamper oracle: random bit flips must all fail loudly
    *_, rsa, keys = setup
    rng = random.Random(12)
    res = write_engine(b"m", AccessType.TE, _te_policy(), keys, rng)
    for _ in range(200):
        blob = bytearray(res.c_h)
        pos = rng.randrange(len(blob))
        blob[pos] ^= 1 << rng.randrange(8)
        with pytest.raises(KeyMismatch):
            decrypt_get_hash(AccessType.TE, rsa.sk, bytes(blob))


def test_fresh_payload_key_per_call(setup):
    *_, keys = setup
    rng = random.Random(13)
    a = write_engine(b"m", AccessType.TE, _te_policy(), keys, rng)
    b = write_engine(b"m", AccessType.TE, _te_policy(), keys, rng)
    assert a.bundle.c_m != b.bundle.c_m


@pytest.mark.parametrize("size", [0, 1, 255, 4096, 1 << 20])
def test_hybrid_roundtrip_sizes(setup, size):
    abe, tree, te, rsa, keys = setup
    rng = random.Random(size + 1)
    m = rng.randbytes(size)

    policy = Policy(tag=AccessType.ABE, abe_formula="A OR B")
    res = write_engine(m, AccessType.ABE, policy, keys, rng)
    sk = abe_keygen(abe, {"B"}, rng)
    assert read_engine(res.bundle, AbeReadKey(sk=sk)) == m

    policy = Policy(tag=AccessType.BE, be_group_size=8, be_revoked=frozenset({3}))
    res = write_engine(m, AccessType.BE, policy, keys, rng)
    assert read_engine(res.bundle, BeReadKey(leaf_keys=tree.leaf_keys(7), leaf_index=7)) == m

    res = write_engine(m, AccessType.TE, _te_policy(), keys, rng)
    ct = TeCiphertext.decode(te.pk.group(), res.bundle.x)
    shares = tuple(te_share_dec(s, ct, b"label-1", rng) for s in te.shares[1:3])
    assert read_engine(res.bundle, TeReadKey(vk=te.vk, label=b"label-1", shares=shares)) == m
