"""Versioned key containers.

Every key that leaves a process travels as a self-describing binary record:
magic ``FACK``, version u16, scheme tag u8, body.  The same bytes serve as
the on-disk key-file format and the wire payload for key distribution.
"""

from __future__ import annotations

import struct
from pathlib import Path

from ..errors import CodecError
from .abe import AbeKeys, AbeMasterKey, AbePublicKey, AbeSecretKey, _backend_for
from .hybridpke import PkePublicKey, PkeSecretKey
from .subtree import SubtreeKeyTree
from .te import TePublicKey, TeSecretShare, TeVerificationKey

MAGIC = b"FACK"
VERSION = 1

TAG_ABE_PUBLIC = 0x01
TAG_ABE_MASTER = 0x02
TAG_ABE_SECRET = 0x03
TAG_BE_TREE = 0x10
TAG_BE_LEAF = 0x11
TAG_TE_PUBLIC = 0x20
TAG_TE_VERIFICATION = 0x21
TAG_TE_SHARE = 0x22
TAG_PKE_PUBLIC = 0x30
TAG_PKE_SECRET = 0x31


def _frame(tag: int, body: bytes) -> bytes:
    return MAGIC + struct.pack(">HB", VERSION, tag) + body


def _unframe(raw: bytes) -> tuple[int, bytes]:
    if len(raw) < 7 or raw[:4] != MAGIC:
        raise CodecError("not a key record (bad magic)")
    version, tag = struct.unpack_from(">HB", raw, 4)
    if version != VERSION:
        raise CodecError(f"unsupported key record version {version}")
    return tag, raw[7:]


def _b(v: bytes) -> bytes:
    return struct.pack(">I", len(v)) + v


def _rb(raw: bytes, off: int) -> tuple[bytes, int]:
    (n,) = struct.unpack_from(">I", raw, off)
    off += 4
    return raw[off : off + n], off + n


# --- ABE -----------------------------------------------------------------


def encode_abe_public(pk: AbePublicKey) -> bytes:
    be = _backend_for(pk.level)
    body = struct.pack(">H", pk.level) + _b(be.encode(pk.g_a)) + _b(be.encode(pk.y))
    return _frame(TAG_ABE_PUBLIC, body)


def _decode_abe_public_body(body: bytes) -> AbePublicKey:
    (level,) = struct.unpack_from(">H", body, 0)
    be = _backend_for(level)
    g_a_raw, off = _rb(body, 2)
    y_raw, off = _rb(body, off)
    return AbePublicKey(level=level, g_a=be.decode(g_a_raw), y=be.decode(y_raw))


def encode_abe_master(keys: AbeKeys) -> bytes:
    be = _backend_for(keys.msk.level)
    body = (
        struct.pack(">H", keys.msk.level)
        + _b(be.grp.encode_scalar(keys.msk.alpha))
        + _b(be.grp.encode_scalar(keys.msk.a))
        + _b(encode_abe_public(keys.pk))
    )
    return _frame(TAG_ABE_MASTER, body)


def encode_abe_secret(sk: AbeSecretKey) -> bytes:
    be = _backend_for(sk.pk.level)
    parts = [struct.pack(">H", sk.pk.level), _b(encode_abe_public(sk.pk))]
    parts.append(_b(be.encode(sk.k)))
    parts.append(_b(be.encode(sk.l)))
    attrs = sorted(sk.attrs)
    parts.append(struct.pack(">H", len(attrs)))
    for attr in attrs:
        raw = attr.encode("utf-8")
        parts.append(struct.pack(">H", len(raw)) + raw)
        parts.append(_b(be.encode(sk.k_attr[attr])))
    return _frame(TAG_ABE_SECRET, b"".join(parts))


def _decode_abe_secret_body(body: bytes) -> AbeSecretKey:
    (level,) = struct.unpack_from(">H", body, 0)
    be = _backend_for(level)
    pk_raw, off = _rb(body, 2)
    pk = decode(pk_raw)
    k_raw, off = _rb(body, off)
    l_raw, off = _rb(body, off)
    (count,) = struct.unpack_from(">H", body, off)
    off += 2
    k_attr = {}
    for _ in range(count):
        (alen,) = struct.unpack_from(">H", body, off)
        off += 2
        attr = body[off : off + alen].decode("utf-8")
        off += alen
        el_raw, off = _rb(body, off)
        k_attr[attr] = be.decode(el_raw)
    return AbeSecretKey(
        pk=pk,
        attrs=frozenset(k_attr),
        k=be.decode(k_raw),
        l=be.decode(l_raw),
        k_attr=k_attr,
    )


# --- broadcast tree -------------------------------------------------------


def encode_be_tree(tree: SubtreeKeyTree) -> bytes:
    body = struct.pack(">II", tree.n_clients, tree.n_leaves) + b"".join(tree.node_keys)
    return _frame(TAG_BE_TREE, body)


def _decode_be_tree_body(body: bytes) -> SubtreeKeyTree:
    n_clients, n_leaves = struct.unpack_from(">II", body, 0)
    raw = body[8:]
    total = 2 * n_leaves - 1
    if len(raw) != total * 32:
        raise CodecError("bad tree key block length")
    keys = tuple(raw[i * 32 : (i + 1) * 32] for i in range(total))
    return SubtreeKeyTree(n_clients=n_clients, n_leaves=n_leaves, node_keys=keys)


def encode_be_leaf(leaf_index: int, n_leaves: int, leaf_keys: list[bytes]) -> bytes:
    body = struct.pack(">III", leaf_index, n_leaves, len(leaf_keys)) + b"".join(leaf_keys)
    return _frame(TAG_BE_LEAF, body)


def _decode_be_leaf_body(body: bytes) -> tuple[int, int, list[bytes]]:
    leaf_index, n_leaves, count = struct.unpack_from(">III", body, 0)
    raw = body[12:]
    if len(raw) != count * 32:
        raise CodecError("bad leaf key block length")
    return leaf_index, n_leaves, [raw[i * 32 : (i + 1) * 32] for i in range(count)]


# --- threshold keys --------------------------------------------------------


def encode_te_public(pk: TePublicKey) -> bytes:
    grp = pk.group()
    body = struct.pack(">HHH", pk.level, pk.n, pk.t) + _b(grp.encode_element(pk.h)) + _b(
        grp.encode_element(pk.g_bar)
    )
    return _frame(TAG_TE_PUBLIC, body)


def _decode_te_public_body(body: bytes) -> TePublicKey:
    level, n, t = struct.unpack_from(">HHH", body, 0)
    from .groups import SchnorrGroup

    grp = SchnorrGroup.for_level(level)
    h_raw, off = _rb(body, 6)
    gbar_raw, off = _rb(body, off)
    return TePublicKey(
        level=level, n=n, t=t, h=grp.decode_element(h_raw), g_bar=grp.decode_element(gbar_raw)
    )


def encode_te_verification(vk: TeVerificationKey) -> bytes:
    grp = vk.pk.group()
    parts = [_b(encode_te_public(vk.pk)), struct.pack(">H", len(vk.h_i))]
    parts.extend(_b(grp.encode_element(h)) for h in vk.h_i)
    return _frame(TAG_TE_VERIFICATION, b"".join(parts))


def _decode_te_verification_body(body: bytes) -> TeVerificationKey:
    pk_raw, off = _rb(body, 0)
    pk = decode(pk_raw)
    grp = pk.group()
    (count,) = struct.unpack_from(">H", body, off)
    off += 2
    h_i = []
    for _ in range(count):
        raw, off = _rb(body, off)
        h_i.append(grp.decode_element(raw))
    return TeVerificationKey(pk=pk, h_i=tuple(h_i))


def encode_te_share(share: TeSecretShare) -> bytes:
    grp = share.pk.group()
    body = _b(encode_te_public(share.pk)) + struct.pack(">H", share.replica_id) + _b(
        grp.encode_scalar(share.x_i)
    )
    return _frame(TAG_TE_SHARE, body)


def _decode_te_share_body(body: bytes) -> TeSecretShare:
    pk_raw, off = _rb(body, 0)
    pk = decode(pk_raw)
    (rid,) = struct.unpack_from(">H", body, off)
    off += 2
    x_raw, off = _rb(body, off)
    return TeSecretShare(pk=pk, replica_id=rid, x_i=pk.group().decode_scalar(x_raw))


# --- hybrid PKE -------------------------------------------------------------


def encode_pke_public(pk: PkePublicKey) -> bytes:
    return _frame(TAG_PKE_PUBLIC, pk.raw)


def encode_pke_secret(sk: PkeSecretKey) -> bytes:
    return _frame(TAG_PKE_SECRET, sk.raw)


# --- generic load/save -------------------------------------------------------

_DECODERS = {
    TAG_ABE_PUBLIC: _decode_abe_public_body,
    TAG_ABE_SECRET: _decode_abe_secret_body,
    TAG_BE_TREE: _decode_be_tree_body,
    TAG_BE_LEAF: _decode_be_leaf_body,
    TAG_TE_PUBLIC: _decode_te_public_body,
    TAG_TE_VERIFICATION: _decode_te_verification_body,
    TAG_TE_SHARE: _decode_te_share_body,
    TAG_PKE_PUBLIC: lambda body: PkePublicKey(raw=body),
    TAG_PKE_SECRET: lambda body: PkeSecretKey(raw=body),
}


def _decode_abe_master_body(body: bytes):
    (level,) = struct.unpack_from(">H", body, 0)
    be = _backend_for(level)
    alpha_raw, off = _rb(body, 2)
    a_raw, off = _rb(body, off)
    pk_raw, off = _rb(body, off)
    return AbeKeys(
        pk=decode(pk_raw),
        msk=AbeMasterKey(
            level=level, alpha=be.grp.decode_scalar(alpha_raw), a=be.grp.decode_scalar(a_raw)
        ),
    )


_DECODERS[TAG_ABE_MASTER] = _decode_abe_master_body


def decode(raw: bytes):
    tag, body = _unframe(raw)
    decoder = _DECODERS.get(tag)
    if decoder is None:
        raise CodecError(f"unknown key record tag {tag:#x}")
    try:
        return decoder(body)
    except (struct.error, IndexError):
        raise CodecError("truncated key record body")


def save(path: str | Path, record: bytes) -> None:
    Path(path).write_bytes(record)


def load(path: str | Path):
    return decode(Path(path).read_bytes())
