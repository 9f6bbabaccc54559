"""Labeled threshold encryption with publicly verifiable decryption shares.

TDH2 lineage over the embedded prime-order Schnorr group: the secret key is
Shamir-shared across n replicas; a ciphertext binds a label; each replica's
decryption share carries a Chaum-Pedersen equality proof whose challenge
includes the label, so shares are publicly checkable and scoped to the
context they were produced for.  Any t verified shares reconstruct; the
result is independent of which subset is used.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..errors import (
    CodecError,
    GatedStoreError,
    InsufficientShares,
    InvalidShare,
    LabelMismatch,
)
from . import aead
from .groups import SchnorrGroup


@dataclass(frozen=True)
class TePublicKey:
    level: int
    n: int
    t: int
    h: int  # g^x
    g_bar: int  # independent generator for ciphertext validity proofs

    def group(self) -> SchnorrGroup:
        return SchnorrGroup.for_level(self.level)


@dataclass(frozen=True)
class TeVerificationKey:
    pk: TePublicKey
    h_i: tuple[int, ...]  # g^(x_i), indexed by replica id


@dataclass(frozen=True)
class TeSecretShare:
    pk: TePublicKey
    replica_id: int  # 0-based
    x_i: int


@dataclass(frozen=True)
class TeKeys:
    pk: TePublicKey
    vk: TeVerificationKey
    shares: tuple[TeSecretShare, ...]


@dataclass(frozen=True)
class TeCiphertext:
    label: bytes
    c: bytes  # payload xored with the pad derived from h^r
    u: int  # g^r
    u_bar: int  # g_bar^r
    e: int  # validity challenge
    f: int  # validity response

    def encode(self, grp: SchnorrGroup) -> bytes:
        parts = [
            len(self.label).to_bytes(4, "big"),
            self.label,
            len(self.c).to_bytes(4, "big"),
            self.c,
            grp.encode_element(self.u),
            grp.encode_element(self.u_bar),
            grp.encode_scalar(self.e),
            grp.encode_scalar(self.f),
        ]
        return b"".join(parts)

    @classmethod
    def decode(cls, grp: SchnorrGroup, raw: bytes) -> "TeCiphertext":
        try:
            off = 0
            llen = int.from_bytes(raw[off : off + 4], "big")
            off += 4
            label = raw[off : off + llen]
            off += llen
            clen = int.from_bytes(raw[off : off + 4], "big")
            off += 4
            c = raw[off : off + clen]
            off += clen
            u = grp.decode_element(raw[off : off + grp._elem_len])
            off += grp._elem_len
            u_bar = grp.decode_element(raw[off : off + grp._elem_len])
            off += grp._elem_len
            e = grp.decode_scalar(raw[off : off + grp._scalar_len])
            off += grp._scalar_len
            f = grp.decode_scalar(raw[off : off + grp._scalar_len])
            off += grp._scalar_len
            if off != len(raw):
                raise CodecError("trailing bytes")
        except (IndexError, ValueError):
            raise CodecError("malformed threshold ciphertext")
        return cls(label=label, c=c, u=u, u_bar=u_bar, e=e, f=f)


@dataclass(frozen=True)
class DecryptionShare:
    """One replica's partial decryption plus its validity proof."""

    replica_id: int
    u_i: int  # u^(x_i)
    e_i: int  # proof challenge
    f_i: int  # proof response
    label: bytes

    def encode(self, grp: SchnorrGroup) -> bytes:
        return b"".join(
            [
                self.replica_id.to_bytes(2, "big"),
                grp.encode_element(self.u_i),
                grp.encode_scalar(self.e_i),
                grp.encode_scalar(self.f_i),
                len(self.label).to_bytes(4, "big"),
                self.label,
            ]
        )

    @classmethod
    def decode(cls, grp: SchnorrGroup, raw: bytes) -> "DecryptionShare":
        try:
            off = 0
            rid = int.from_bytes(raw[off : off + 2], "big")
            off += 2
            u_i = grp.decode_element(raw[off : off + grp._elem_len])
            off += grp._elem_len
            e_i = grp.decode_scalar(raw[off : off + grp._scalar_len])
            off += grp._scalar_len
            f_i = grp.decode_scalar(raw[off : off + grp._scalar_len])
            off += grp._scalar_len
            llen = int.from_bytes(raw[off : off + 4], "big")
            off += 4
            label = raw[off : off + llen]
            if off + llen != len(raw):
                raise CodecError("trailing bytes")
        except (IndexError, ValueError):
            raise CodecError("malformed decryption share")
        return cls(replica_id=rid, u_i=u_i, e_i=e_i, f_i=f_i, label=label)


def te_setup(n: int, t: int, seed_rng: random.Random, level: int = 128) -> TeKeys:
    """Shamir-share a fresh secret across ``n`` replicas with threshold ``t``."""
    if not 1 <= t <= n:
        raise GatedStoreError(f"threshold must satisfy 1 <= t <= n, got t={t}, n={n}")
    grp = SchnorrGroup.for_level(level)
    coeffs = [grp.random_scalar(seed_rng) for _ in range(t)]  # coeffs[0] = x
    x = coeffs[0]

    def poly(z: int) -> int:
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * z + c) % grp.q
        return acc

    x_shares = [poly(i + 1) for i in range(n)]
    g_bar = grp.hash_to_element(b"te-second-generator")
    pk = TePublicKey(level=level, n=n, t=t, h=grp.exp(grp.g, x), g_bar=g_bar)
    vk = TeVerificationKey(pk=pk, h_i=tuple(grp.exp(grp.g, xi) for xi in x_shares))
    shares = tuple(
        TeSecretShare(pk=pk, replica_id=i, x_i=x_shares[i]) for i in range(n)
    )
    return TeKeys(pk=pk, vk=vk, shares=shares)


def _validity_challenge(grp: SchnorrGroup, label: bytes, c: bytes, u: int, w: int, u_bar: int, w_bar: int) -> int:
    return grp.hash_to_scalar(
        b"te-ct", label, c,
        grp.encode_element(u), grp.encode_element(w),
        grp.encode_element(u_bar), grp.encode_element(w_bar),
    )


def te_encrypt(pk: TePublicKey, m: bytes, label: bytes, rng: random.Random | None = None) -> TeCiphertext:
    """Encrypt ``m`` under ``label``; shares for any other label will not
    verify against the result."""
    if not label:
        raise GatedStoreError("label must be non-empty")
    rng = rng or random.Random()
    grp = pk.group()
    r = grp.random_scalar(rng)
    s = grp.random_scalar(rng)
    pad = aead.xor_pad(grp.encode_element(grp.exp(pk.h, r)), b"te-pad", len(m))
    c = bytes(a ^ b for a, b in zip(m, pad))
    u = grp.exp(grp.g, r)
    w = grp.exp(grp.g, s)
    u_bar = grp.exp(pk.g_bar, r)
    w_bar = grp.exp(pk.g_bar, s)
    e = _validity_challenge(grp, label, c, u, w, u_bar, w_bar)
    f = (s + r * e) % grp.q
    return TeCiphertext(label=label, c=c, u=u, u_bar=u_bar, e=e, f=f)


def te_ciphertext_valid(pk: TePublicKey, ct: TeCiphertext, label: bytes) -> bool:
    if ct.label != label:
        return False
    grp = pk.group()
    w = grp.mul(grp.exp(grp.g, ct.f), grp.inv(grp.exp(ct.u, ct.e)))
    w_bar = grp.mul(grp.exp(pk.g_bar, ct.f), grp.inv(grp.exp(ct.u_bar, ct.e)))
    return ct.e == _validity_challenge(grp, label, ct.c, ct.u, w, ct.u_bar, w_bar)


def _share_challenge(grp: SchnorrGroup, label: bytes, rid: int, u: int, u_i: int, u_hat: int, h_hat: int) -> int:
    return grp.hash_to_scalar(
        b"te-share", label, rid.to_bytes(2, "big"),
        grp.encode_element(u), grp.encode_element(u_i),
        grp.encode_element(u_hat), grp.encode_element(h_hat),
    )


def te_share_dec(
    sk_i: TeSecretShare, ct: TeCiphertext, label: bytes, rng: random.Random | None = None
) -> DecryptionShare:
    """Produce this replica's decryption share.  Refuses on label mismatch
    or an invalid ciphertext rather than emitting a non-verifying share."""
    if ct.label != label:
        raise LabelMismatch("requested label disagrees with the ciphertext label")
    if not te_ciphertext_valid(sk_i.pk, ct, label):
        raise InvalidShare("ciphertext failed its validity proof")
    rng = rng or random.Random()
    grp = sk_i.pk.group()
    u_i = grp.exp(ct.u, sk_i.x_i)
    s_i = grp.random_scalar(rng)
    u_hat = grp.exp(ct.u, s_i)
    h_hat = grp.exp(grp.g, s_i)
    e_i = _share_challenge(grp, label, sk_i.replica_id, ct.u, u_i, u_hat, h_hat)
    f_i = (s_i + sk_i.x_i * e_i) % grp.q
    return DecryptionShare(replica_id=sk_i.replica_id, u_i=u_i, e_i=e_i, f_i=f_i, label=label)


def _share_proof_ok(vk: TeVerificationKey, ct: TeCiphertext, label: bytes, share: DecryptionShare) -> bool:
    """Share-side proof check; assumes the ciphertext was already validated."""
    if share.label != label:
        return False
    if not 0 <= share.replica_id < vk.pk.n:
        return False
    grp = vk.pk.group()
    if not (1 <= share.u_i < grp.p):
        return False
    u_hat = grp.mul(grp.exp(ct.u, share.f_i), grp.inv(grp.exp(share.u_i, share.e_i)))
    h_hat = grp.mul(grp.exp(grp.g, share.f_i), grp.inv(grp.exp(vk.h_i[share.replica_id], share.e_i)))
    return share.e_i == _share_challenge(grp, label, share.replica_id, ct.u, share.u_i, u_hat, h_hat)


def te_verify_share(vk: TeVerificationKey, ct: TeCiphertext, label: bytes, share: DecryptionShare) -> bool:
    """Deterministic public share verification."""
    if ct.label != label or not te_ciphertext_valid(vk.pk, ct, label):
        return False
    return _share_proof_ok(vk, ct, label, share)


def _lagrange_at_zero(grp: SchnorrGroup, ids: list[int]) -> dict[int, int]:
    coeffs = {}
    for i in ids:
        num, den = 1, 1
        xi = i + 1
        for j in ids:
            if j == i:
                continue
            xj = j + 1
            num = (num * (-xj)) % grp.q
            den = (den * (xi - xj)) % grp.q
        coeffs[i] = (num * pow(den, grp.q - 2, grp.q)) % grp.q
    return coeffs


def te_combine(
    vk: TeVerificationKey,
    ct: TeCiphertext,
    label: bytes,
    shares: list[DecryptionShare] | tuple[DecryptionShare, ...],
) -> bytes:
    """Combine at least t verified shares from distinct replicas into the
    plaintext.  Unverifiable shares are rejected before combining."""
    pk = vk.pk
    grp = pk.group()
    by_id: dict[int, DecryptionShare] = {}
    for share in shares:
        if share.replica_id in by_id:
            continue
        by_id[share.replica_id] = share
    if len(by_id) < pk.t:
        raise InsufficientShares(f"need {pk.t} distinct shares, got {len(by_id)}")
    if ct.label != label or not te_ciphertext_valid(pk, ct, label):
        raise InvalidShare("ciphertext failed its validity proof")
    for share in by_id.values():
        if not _share_proof_ok(vk, ct, label, share):
            raise InvalidShare(f"share from replica {share.replica_id} failed verification")
    chosen = sorted(by_id)[: pk.t]
    lam = _lagrange_at_zero(grp, chosen)
    acc = 1
    for i in chosen:
        acc = grp.mul(acc, grp.exp(by_id[i].u_i, lam[i]))
    pad = aead.xor_pad(grp.encode_element(acc), b"te-pad", len(ct.c))
    return bytes(a ^ b for a, b in zip(ct.c, pad))
