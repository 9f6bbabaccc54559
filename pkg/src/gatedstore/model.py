"""Core domain values: access types, policies, attributes, ciphertext bundles.

Everything here has a canonical binary encoding so values can cross process
boundaries, be anchored on chain, and be compared byte-for-byte in quorum
reads.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field

from .errors import CodecError, PolicySyntaxError

BUNDLE_VERSION = 1


class AccessType(enum.IntEnum):
    """The three access-control methods; wire values are stable."""

    BE = 1
    ABE = 2
    TE = 3

    def to_byte(self) -> bytes:
        return bytes([self.value])

    @classmethod
    def from_byte(cls, b: int) -> "AccessType":
        try:
            return cls(b)
        except ValueError:
            raise CodecError(f"unknown access type byte {b!r}")


def _pack_bytes(b: bytes) -> bytes:
    return struct.pack(">I", len(b)) + b


def _unpack_bytes(buf: bytes, off: int) -> tuple[bytes, int]:
    if off + 4 > len(buf):
        raise CodecError("truncated length prefix")
    (n,) = struct.unpack_from(">I", buf, off)
    off += 4
    if off + n > len(buf):
        raise CodecError("truncated byte field")
    return buf[off : off + n], off + n


def _pack_str(s: str) -> bytes:
    return _pack_bytes(s.encode("utf-8"))


def _unpack_str(buf: bytes, off: int) -> tuple[str, int]:
    raw, off = _unpack_bytes(buf, off)
    return raw.decode("utf-8"), off


@dataclass(frozen=True)
class Policy:
    """Who may read: a formula (ABE), an eligible leaf set (BE), or a
    label plus authorized identities (TE)."""

    tag: AccessType
    abe_formula: str | None = None
    be_group_size: int | None = None
    be_revoked: frozenset[int] = field(default_factory=frozenset)
    te_label: bytes | None = None
    te_authorized: frozenset[str] = field(default_factory=frozenset)

    def validate(self) -> None:
        if self.tag == AccessType.ABE:
            if not self.abe_formula:
                raise PolicySyntaxError("ABE policy requires a non-empty formula")
        elif self.tag == AccessType.BE:
            if self.be_group_size is None or self.be_group_size < 1:
                raise PolicySyntaxError("BE policy requires a positive group size")
            bad = [i for i in self.be_revoked if not 0 <= i < self.be_group_size]
            if bad:
                raise PolicySyntaxError(f"revoked leaves out of range: {sorted(bad)}")
        elif self.tag == AccessType.TE:
            if not self.te_label:
                raise PolicySyntaxError("TE policy requires a non-empty label")

    def eligible_leaves(self) -> frozenset[int]:
        """BE only: client leaf indices allowed to read."""
        assert self.tag == AccessType.BE and self.be_group_size is not None
        return frozenset(range(self.be_group_size)) - self.be_revoked

    def encode(self) -> bytes:
        out = [self.tag.to_byte()]
        if self.tag == AccessType.ABE:
            out.append(_pack_str(self.abe_formula or ""))
        elif self.tag == AccessType.BE:
            out.append(struct.pack(">I", self.be_group_size or 0))
            revoked = sorted(self.be_revoked)
            out.append(struct.pack(">I", len(revoked)))
            out.extend(struct.pack(">I", i) for i in revoked)
        else:
            out.append(_pack_bytes(self.te_label or b""))
            ids = sorted(self.te_authorized)
            out.append(struct.pack(">I", len(ids)))
            out.extend(_pack_str(s) for s in ids)
        return b"".join(out)

    @classmethod
    def decode(cls, buf: bytes) -> "Policy":
        if not buf:
            raise CodecError("empty policy encoding")
        tag = AccessType.from_byte(buf[0])
        off = 1
        if tag == AccessType.ABE:
            formula, off = _unpack_str(buf, off)
            p = cls(tag=tag, abe_formula=formula)
        elif tag == AccessType.BE:
            (size, count) = struct.unpack_from(">II", buf, off)
            off += 8
            revoked = []
            for _ in range(count):
                (i,) = struct.unpack_from(">I", buf, off)
                off += 4
                revoked.append(i)
            p = cls(tag=tag, be_group_size=size, be_revoked=frozenset(revoked))
        else:
            label, off = _unpack_bytes(buf, off)
            (count,) = struct.unpack_from(">I", buf, off)
            off += 4
            ids = []
            for _ in range(count):
                s, off = _unpack_str(buf, off)
                ids.append(s)
            p = cls(tag=tag, te_label=label, te_authorized=frozenset(ids))
        p.validate()
        return p


@dataclass(frozen=True)
class PartialAttribute:
    """A requester's claimed credential, shaped by the access type."""

    tag: AccessType
    abe_attrs: frozenset[str] = field(default_factory=frozenset)
    be_leaf_index: int | None = None
    te_identity: str | None = None

    def encode(self) -> bytes:
        out = [self.tag.to_byte()]
        if self.tag == AccessType.ABE:
            attrs = sorted(self.abe_attrs)
            out.append(struct.pack(">I", len(attrs)))
            out.extend(_pack_str(a) for a in attrs)
        elif self.tag == AccessType.BE:
            out.append(struct.pack(">I", self.be_leaf_index or 0))
        else:
            out.append(_pack_str(self.te_identity or ""))
        return b"".join(out)

    @classmethod
    def decode(cls, buf: bytes) -> "PartialAttribute":
        if not buf:
            raise CodecError("empty attribute encoding")
        tag = AccessType.from_byte(buf[0])
        off = 1
        if tag == AccessType.ABE:
            (count,) = struct.unpack_from(">I", buf, off)
            off += 4
            attrs = []
            for _ in range(count):
                s, off = _unpack_str(buf, off)
                attrs.append(s)
            return cls(tag=tag, abe_attrs=frozenset(attrs))
        if tag == AccessType.BE:
            (i,) = struct.unpack_from(">I", buf, off)
            return cls(tag=tag, be_leaf_index=i)
        ident, off = _unpack_str(buf, off)
        return cls(tag=tag, te_identity=ident)


@dataclass(frozen=True)
class CipherBundle:
    """The off-chain stored value: payload ciphertext plus wrapped key
    material.

    ``c_m`` is an AEAD blob (nonce prepended, tag appended) so tampering is
    always detected.  ``x`` depends on the scheme: a single opaque wrap for
    ABE and TE, or an ordered list of per-cover-node wraps for BE.  The
    encoding is self-describing: no trial decryption is needed to route it.
    """

    tag: AccessType
    c_m: bytes
    x: bytes | None = None
    be_entries: tuple[tuple[int, bytes], ...] = ()
    be_n_leaves: int = 0

    def encode(self) -> bytes:
        out = [struct.pack(">BB", BUNDLE_VERSION, self.tag.value), _pack_bytes(self.c_m)]
        if self.tag == AccessType.BE:
            out.append(struct.pack(">IH", self.be_n_leaves, len(self.be_entries)))
            for node, wrap in self.be_entries:
                out.append(struct.pack(">I", node))
                out.append(_pack_bytes(wrap))
        else:
            out.append(_pack_bytes(self.x or b""))
        return b"".join(out)

    @classmethod
    def decode(cls, buf: bytes) -> "CipherBundle":
        if len(buf) < 2:
            raise CodecError("bundle too short")
        version, tag_b = struct.unpack_from(">BB", buf, 0)
        if version != BUNDLE_VERSION:
            raise CodecError(f"unsupported bundle version {version}")
        tag = AccessType.from_byte(tag_b)
        c_m, off = _unpack_bytes(buf, 2)
        if tag == AccessType.BE:
            if off + 6 > len(buf):
                raise CodecError("truncated BE section")
            n_leaves, count = struct.unpack_from(">IH", buf, off)
            off += 6
            entries = []
            prev = -1
            for _ in range(count):
                (node,) = struct.unpack_from(">I", buf, off)
                off += 4
                wrap, off = _unpack_bytes(buf, off)
                if node <= prev:
                    raise CodecError("BE cover entries not strictly ascending")
                prev = node
                entries.append((node, wrap))
            if off != len(buf):
                raise CodecError("trailing bytes after BE bundle")
            return cls(tag=tag, c_m=c_m, be_entries=tuple(entries), be_n_leaves=n_leaves)
        x, off = _unpack_bytes(buf, off)
        if off != len(buf):
            raise CodecError("trailing bytes after bundle")
        return cls(tag=tag, c_m=c_m, x=x)
