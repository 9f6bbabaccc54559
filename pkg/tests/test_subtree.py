import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from gatedstore.crypto import be_build_tree, be_cover, be_decrypt, be_encrypt
from gatedstore.errors import AccessDenied, CorruptBundle, EmptyAudience, GatedStoreError


def covered_leaves(tree, cover):
    """Oracle: expand each cover node to the client leaves beneath it."""
    out = set()
    for node in cover:
        frontier = [node]
        while frontier:
            i = frontier.pop()
            if i >= tree.leaf_offset:
                client = i - tree.leaf_offset
                if client < tree.n_clients:
                    out.add(client)
            else:
                frontier.extend((2 * i + 1, 2 * i + 2))
    return out


def cover_hits_per_leaf(tree, cover, client):
    """Oracle: how many cover nodes lie on this client's root path."""
    return sum(1 for node in tree.ancestors(tree.leaf_node(client)) if node in cover)


def test_four_clients_tree_shape():
    tree = be_build_tree(4, b"s")
    assert len(tree.node_keys) == 7
    assert tree.leaf_offset == 3
    assert [tree.leaf_node(i) for i in range(4)] == [3, 4, 5, 6]


def test_five_clients_pads_to_eight_leaves():
    tree = be_build_tree(5, b"s")
    assert tree.n_leaves == 8
    assert len(tree.node_keys) == 15
    # three dummy leaves exist but are unaddressable as clients
    with pytest.raises(GatedStoreError):
        tree.leaf_node(5)


def test_leaf_key_chain_is_ancestors():
    tree = be_build_tree(4, b"s")
    # client 0 sits at node 3; chain = k3, k1, k0
    assert tree.leaf_keys(0) == [tree.node_keys[3], tree.node_keys[1], tree.node_keys[0]]


def test_recipient_key_count_is_log_n_plus_one():
    for n in (1, 2, 4, 8, 64, 1024):
        tree = be_build_tree(n, b"s")
        assert len(tree.leaf_keys(0)) == int(math.log2(tree.n_leaves)) + 1


def test_tree_deterministic_from_seed():
    assert be_build_tree(8, b"x").node_keys == be_build_tree(8, b"x").node_keys
    assert be_build_tree(8, b"x").node_keys != be_build_tree(8, b"y").node_keys


def test_rejects_empty_group():
    with pytest.raises(GatedStoreError):
        be_build_tree(0, b"s")


def test_cover_nobody_revoked_is_root():
    tree = be_build_tree(8, b"s")
    assert be_cover(tree, set()) == (0,)


def test_cover_first_client_revoked():
    # leaves at nodes 7..14; revoking client 0 (node 7) leaves {2, 4, 8}
    tree = be_build_tree(8, b"s")
    assert be_cover(tree, {0}) == (2, 4, 8)


def test_cover_four_clients_one_revoked():
    tree = be_build_tree(4, b"s")
    for r in range(4):
        assert len(be_cover(tree, {r})) == 2


def test_cover_all_revoked_refused():
    tree = be_build_tree(4, b"s")
    with pytest.raises(EmptyAudience):
        be_cover(tree, {0, 1, 2, 3})


def test_cover_out_of_range_rejected():
    tree = be_build_tree(4, b"s")
    with pytest.raises(GatedStoreError):
        be_cover(tree, {4})


def test_cover_dummies_never_covered():
    tree = be_build_tree(5, b"s")
    cover = be_cover(tree, set())
    assert covered_leaves(tree, cover) == {0, 1, 2, 3, 4}
    for client in range(5):
        assert cover_hits_per_leaf(tree, cover, client) == 1


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10), st.data())
def test_cover_exact_and_bounded(log_n, data):
    n = 2**log_n
    tree = be_build_tree(n, b"prop")
    r = data.draw(st.integers(0, n - 1))
    revoked = set(data.draw(st.lists(st.integers(0, n - 1), max_size=r, unique=True)))
    cover = be_cover(tree, revoked)
    # disjoint-exact-cover oracle
    eligible = set(range(n)) - revoked
    assert covered_leaves(tree, cover) == eligible
    for client in range(n):
        hits = cover_hits_per_leaf(tree, cover, client)
        assert hits == (1 if client in eligible else 0)
    # size bound
    rr = len(revoked)
    if rr == 0:
        assert len(cover) == 1
    else:
        assert len(cover) <= rr * max(1, math.ceil(math.log2(n / rr)))


def test_encrypt_no_revocation_single_entry():
    tree = be_build_tree(8, b"s")
    bundle = be_encrypt(b"m", tree, set(), random.Random(0))
    assert [n for n, _ in bundle.be_entries] == [0]


def test_encrypt_entries_match_cover():
    tree = be_build_tree(8, b"s")
    bundle = be_encrypt(b"m", tree, {0}, random.Random(0))
    assert [n for n, _ in bundle.be_entries] == [2, 4, 8]


def test_every_leaf_decrypts_or_fails_exactly():
    # exhaustive per-leaf decryption oracle
    tree = be_build_tree(8, b"s")
    rng = random.Random(1)
    revoked = {0, 3, 4}
    bundle = be_encrypt(b"payload", tree, revoked, rng)
    for client in range(8):
        keys = tree.leaf_keys(client)
        if client in revoked:
            with pytest.raises(AccessDenied):
                be_decrypt(keys, client, bundle)
        else:
            assert be_decrypt(keys, client, bundle) == b"payload"


def test_single_client_group():
    tree = be_build_tree(1, b"s")
    bundle = be_encrypt(b"solo", tree, set(), random.Random(2))
    assert [n for n, _ in bundle.be_entries] == [0]
    assert be_decrypt(tree.leaf_keys(0), 0, bundle) == b"solo"


def test_corrupt_wrap_distinct_from_denied():
    tree = be_build_tree(4, b"s")
    bundle = be_encrypt(b"m", tree, set(), random.Random(3))
    node, wrap = bundle.be_entries[0]
    bad = bytearray(wrap)
    bad[-1] ^= 1
    corrupt = bundle.__class__(
        tag=bundle.tag,
        c_m=bundle.c_m,
        be_entries=((node, bytes(bad)),),
        be_n_leaves=bundle.be_n_leaves,
    )
    with pytest.raises(CorruptBundle):
        be_decrypt(tree.leaf_keys(0), 0, corrupt)
