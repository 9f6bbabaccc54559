import random

import pytest

from gatedstore.crypto import abe_keygen, abe_setup, be_build_tree, pke_generate, te_setup
from gatedstore.crypto import keyfile
from gatedstore.crypto import abe_decrypt, abe_encrypt
from gatedstore.errors import CodecError


@pytest.fixture(scope="module")
def rng():
    return random.Random(0xF11E)


def test_magic_and_version(rng):
    record = keyfile.encode_pke_public(pke_generate(rng).pk)
    assert record[:4] == b"FACK"
    with pytest.raises(CodecError):
        keyfile.decode(b"JUNK" + record[4:])
    with pytest.raises(CodecError):
        keyfile.decode(record[:4] + b"\x00\x09" + record[6:])


def test_abe_public_roundtrip(rng):
    keys = abe_setup(128, rng)
    assert keyfile.decode(keyfile.encode_abe_public(keys.pk)) == keys.pk


def test_abe_master_roundtrip(rng):
    keys = abe_setup(128, rng)
    loaded = keyfile.decode(keyfile.encode_abe_master(keys))
    assert loaded == keys


def test_abe_secret_roundtrip_still_decrypts(rng):
    keys = abe_setup(128, rng)
    sk = abe_keygen(keys, {"A", "B"}, rng)
    loaded = keyfile.decode(keyfile.encode_abe_secret(sk))
    ct = abe_encrypt(keys.pk, b"m", "A AND B", rng)
    assert abe_decrypt(loaded, ct) == b"m"


def test_be_tree_and_leaf_roundtrip(rng):
    tree = be_build_tree(5, b"seed")
    loaded = keyfile.decode(keyfile.encode_be_tree(tree))
    assert loaded == tree
    leaf_record = keyfile.encode_be_leaf(3, tree.n_leaves, tree.leaf_keys(3))
    leaf_index, n_leaves, keys = keyfile.decode(leaf_record)
    assert (leaf_index, n_leaves, keys) == (3, 8, tree.leaf_keys(3))


def test_te_records_roundtrip(rng):
    keys = te_setup(4, 2, rng)
    assert keyfile.decode(keyfile.encode_te_public(keys.pk)) == keys.pk
    assert keyfile.decode(keyfile.encode_te_verification(keys.vk)) == keys.vk
    assert keyfile.decode(keyfile.encode_te_share(keys.shares[2])) == keys.shares[2]


def test_pke_records_roundtrip(rng):
    pair = pke_generate(rng)
    assert keyfile.decode(keyfile.encode_pke_public(pair.pk)) == pair.pk
    assert keyfile.decode(keyfile.encode_pke_secret(pair.sk)) == pair.sk


def test_file_save_load(rng, tmp_path):
    pair = pke_generate(rng)
    path = tmp_path / "key.fack"
    keyfile.save(path, keyfile.encode_pke_secret(pair.sk))
    assert keyfile.load(path) == pair.sk


def test_unknown_tag_rejected(rng):
    record = keyfile.encode_pke_public(pke_generate(rng).pk)
    bad = record[:6] + b"\xee" + record[7:]
    with pytest.raises(CodecError):
        keyfile.decode(bad)
