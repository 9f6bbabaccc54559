"""Complete-subtree broadcast encryption with revocation.

Recipients sit at the leaves of a full binary tree stored in array form
(children of node i are 2i+1 and 2i+2, root 0).  Every node holds a
symmetric key derived from the group seed; a recipient holds the keys on
its leaf-to-root path.  Encryption covers the non-revoked leaves with a
minimal set of disjoint subtrees and wraps a fresh payload key once per
cover node.

Group sizes that are not powers of two are padded with permanently revoked
dummy leaves.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..errors import AccessDenied, CorruptBundle, EmptyAudience, GatedStoreError
from ..model import AccessType, CipherBundle
from . import aead


@dataclass(frozen=True)
class SubtreeKeyTree:
    """Broadcaster-side key tree: every node key, plus the real client count."""

    n_clients: int
    n_leaves: int
    node_keys: tuple[bytes, ...]

    @property
    def leaf_offset(self) -> int:
        return self.n_leaves - 1

    def leaf_node(self, client: int) -> int:
        if not 0 <= client < self.n_clients:
            raise GatedStoreError(f"client index {client} out of range")
        return self.leaf_offset + client

    def ancestors(self, node: int) -> list[int]:
        """Node indices from ``node`` up to the root, inclusive."""
        chain = [node]
        while node > 0:
            node = (node - 1) // 2
            chain.append(node)
        return chain

    def leaf_keys(self, client: int) -> list[bytes]:
        """The key chain a recipient holds: leaf key first, root key last."""
        return [self.node_keys[i] for i in self.ancestors(self.leaf_node(client))]


def be_build_tree(n_clients: int, seed: bytes) -> SubtreeKeyTree:
    """Derive the full key tree for ``n_clients`` recipients from ``seed``."""
    if n_clients < 1:
        raise GatedStoreError("need at least one client")
    n_leaves = 1
    while n_leaves < n_clients:
        n_leaves *= 2
    total = 2 * n_leaves - 1
    keys = tuple(
        aead.hkdf(seed, b"subtree-node-%d" % i, aead.KEY_LEN) for i in range(total)
    )
    return SubtreeKeyTree(n_clients=n_clients, n_leaves=n_leaves, node_keys=keys)


def be_cover(tree: SubtreeKeyTree, revoked: set[int] | frozenset[int]) -> tuple[int, ...]:
    """Minimal disjoint subtree roots covering exactly the non-revoked
    clients.  ``revoked`` holds client indices; dummy padding leaves are
    implicitly revoked.  Raises :class:`EmptyAudience` when nobody is left.
    """
    bad = [i for i in revoked if not 0 <= i < tree.n_clients]
    if bad:
        raise GatedStoreError(f"revoked indices out of range: {sorted(bad)}")
    cover = {
        tree.leaf_node(c) for c in range(tree.n_clients) if c not in revoked
    }
    if not cover:
        raise EmptyAudience("all clients revoked")
    # Merge sibling pairs bottom-up, exactly the array-walk from the leaves'
    # parents to the root.
    for i in range(tree.leaf_offset - 1, -1, -1):
        if 2 * i + 1 in cover and 2 * i + 2 in cover:
            cover.discard(2 * i + 1)
            cover.discard(2 * i + 2)
            cover.add(i)
    return tuple(sorted(cover))


def be_encrypt(
    m: bytes,
    tree: SubtreeKeyTree,
    revoked: set[int] | frozenset[int],
    rng: random.Random | None = None,
) -> CipherBundle:
    """Stream-cipher the payload under a fresh key and wrap that key once
    per cover node, entries in ascending node order."""
    rng = rng or random.Random()
    cover = be_cover(tree, revoked)
    key_sc = aead.fresh_key(rng)
    c_m = aead.stream_seal(key_sc, m, rng)
    entries = tuple(
        (node, aead.aes_seal(tree.node_keys[node], key_sc, rng, aad=b"be-wrap-%d" % node))
        for node in cover
    )
    return CipherBundle(
        tag=AccessType.BE, c_m=c_m, be_entries=entries, be_n_leaves=tree.n_leaves
    )


def be_decrypt(leaf_keys: list[bytes], leaf_index: int, bundle: CipherBundle) -> bytes:
    """Recipient-side decryption.

    ``leaf_keys`` is the recipient's leaf-to-root key chain and
    ``leaf_index`` its client index.  Locates the unique cover entry on the
    recipient's root path; no such entry means the recipient is revoked.
    """
    if bundle.tag != AccessType.BE:
        raise GatedStoreError("bundle is not broadcast-encrypted")
    n_leaves = bundle.be_n_leaves
    if n_leaves < 1 or n_leaves & (n_leaves - 1):
        raise CorruptBundle("bundle leaf count is not a power of two")
    node = (n_leaves - 1) + leaf_index
    chain = []
    while True:
        chain.append(node)
        if node == 0:
            break
        node = (node - 1) // 2
    if len(chain) != len(leaf_keys):
        raise GatedStoreError("key chain length does not match the bundle's tree")
    by_node = dict(bundle.be_entries)
    for depth, node in enumerate(chain):
        wrap = by_node.get(node)
        if wrap is None:
            continue
        key_sc = aead.aes_open(leaf_keys[depth], wrap, aad=b"be-wrap-%d" % node)
        return aead.stream_open(key_sc, bundle.c_m)
    raise AccessDenied("no cover entry on this leaf's root path")
