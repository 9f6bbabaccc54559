"""Ciphertext-policy attribute-based encryption.

Classic large-universe CP-ABE shape: the payload key is shared over the
policy's share-generating matrix, one matrix row per policy leaf, and a key
for attribute set S opens the ciphertext iff S's rows span the target
vector.  The scheme is written against the abstract bilinear-group backend
in :mod:`gatedstore.crypto.groups`; bind a hardened pairing library behind
the same interface for production keys.

Payloads are arbitrary bytes: encryption is a KEM (a session element
encapsulated under the policy) plus an AEAD DEM, so a non-satisfying key
yields a clean denial, never garbage plaintext.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..errors import AccessDenied, CodecError, CorruptBundle, GatedStoreError, UnsupportedSecurityLevel
from . import aead
from .groups import G1, G2, ExponentPairingBackend, GroupElement
from .lsss import parse_formula, reconstruction_coefficients, to_share_matrix

SUPPORTED_LEVELS = (128, 256)

_BACKENDS: dict[int, ExponentPairingBackend] = {}


def _backend_for(level: int) -> ExponentPairingBackend:
    if level not in _BACKENDS:
        _BACKENDS[level] = ExponentPairingBackend(level)
    return _BACKENDS[level]


@dataclass(frozen=True)
class AbePublicKey:
    level: int
    g_a: GroupElement  # g1^a
    y: GroupElement  # e(g1, g2)^alpha


@dataclass(frozen=True)
class AbeMasterKey:
    level: int
    alpha: int
    a: int


@dataclass(frozen=True)
class AbeSecretKey:
    """Attribute-bound key; carries its public parameters so decryption
    needs nothing else."""

    pk: AbePublicKey
    attrs: frozenset[str]
    k: GroupElement  # g2^(alpha + a*t)
    l: GroupElement  # g2^t
    k_attr: dict[str, GroupElement]  # H(attr)^t in G1


@dataclass(frozen=True)
class AbeKeys:
    pk: AbePublicKey
    msk: AbeMasterKey


def abe_setup(level: int = 128, rng: random.Random | None = None) -> AbeKeys:
    """Generate public parameters and the master secret."""
    if level not in SUPPORTED_LEVELS:
        raise UnsupportedSecurityLevel(f"level must be one of {SUPPORTED_LEVELS}")
    rng = rng or random.Random()
    be = _backend_for(level)
    alpha = be.random_scalar(rng)
    a = be.random_scalar(rng)
    y = be.exp(be.pair(be.generator(G1), be.generator(G2)), alpha)
    pk = AbePublicKey(level=level, g_a=be.exp(be.generator(G1), a), y=y)
    return AbeKeys(pk=pk, msk=AbeMasterKey(level=level, alpha=alpha, a=a))


def abe_keygen(
    keys: AbeKeys, attrs: frozenset[str] | set[str], rng: random.Random | None = None
) -> AbeSecretKey:
    """Issue a secret key bound to ``attrs``."""
    if not attrs:
        raise GatedStoreError("attribute set must be non-empty")
    rng = rng or random.Random()
    be = _backend_for(keys.msk.level)
    g2 = be.generator(G2)
    t = be.random_scalar(rng)
    k = be.exp(g2, (keys.msk.alpha + keys.msk.a * t) % be.order)
    l = be.exp(g2, t)
    k_attr = {attr: be.exp(be.hash_to_g1(attr.encode("utf-8")), t) for attr in sorted(attrs)}
    return AbeSecretKey(pk=keys.pk, attrs=frozenset(attrs), k=k, l=l, k_attr=k_attr)


def abe_encrypt(
    pk: AbePublicKey, payload: bytes, formula: str, rng: random.Random | None = None
) -> bytes:
    """Encrypt ``payload`` so that exactly the keys satisfying ``formula``
    recover it."""
    rng = rng or random.Random()
    be = _backend_for(pk.level)
    matrix = to_share_matrix(parse_formula(formula))
    g1, g2 = be.generator(G1), be.generator(G2)

    s = be.random_scalar(rng)
    v = [s] + [be.random_scalar(rng) for _ in range(matrix.width - 1)]
    c0 = be.exp(g1, s)
    rows_ct: list[tuple[GroupElement, GroupElement]] = []
    for row, attr in zip(matrix.rows, matrix.row_attrs):
        lam = sum(m * vv for m, vv in zip(row, v)) % be.order
        r_i = be.random_scalar(rng)
        c_i = be.mul(
            be.exp(pk.g_a, lam),
            be.inv(be.exp(be.hash_to_g1(attr.encode("utf-8")), r_i)),
        )
        d_i = be.exp(g2, r_i)
        rows_ct.append((c_i, d_i))

    session = be.exp(pk.y, s)
    dem_key = aead.hkdf(be.encode(session), b"abe-dem")
    sealed = aead.aes_seal(dem_key, payload, rng)

    fb = formula.encode("utf-8")
    out = [bytes([pk.level // 128]), len(fb).to_bytes(4, "big"), fb, be.encode(c0)]
    out.append(len(rows_ct).to_bytes(2, "big"))
    for c_i, d_i in rows_ct:
        out.append(be.encode(c_i))
        out.append(be.encode(d_i))
    out.append(sealed)
    return b"".join(out)


def _decode_ct(raw: bytes):
    if len(raw) < 7:
        raise CodecError("ABE ciphertext too short")
    level = raw[0] * 128
    if level not in SUPPORTED_LEVELS:
        raise CodecError("bad ABE ciphertext level byte")
    be = _backend_for(level)
    elen = 1 + be.grp._elem_len + be.grp._scalar_len
    flen = int.from_bytes(raw[1:5], "big")
    off = 5
    if off + flen + elen + 2 > len(raw):
        raise CodecError("truncated ABE ciphertext")
    formula = raw[off : off + flen].decode("utf-8")
    off += flen
    c0 = be.decode(raw[off : off + elen])
    off += elen
    n_rows = int.from_bytes(raw[off : off + 2], "big")
    off += 2
    rows = []
    for _ in range(n_rows):
        if off + 2 * elen > len(raw):
            raise CodecError("truncated ABE ciphertext rows")
        c_i = be.decode(raw[off : off + elen])
        off += elen
        d_i = be.decode(raw[off : off + elen])
        off += elen
        rows.append((c_i, d_i))
    return be, formula, c0, rows, raw[off:]


def abe_decrypt(sk: AbeSecretKey, ciphertext: bytes) -> bytes:
    """Recover the payload, or raise :class:`AccessDenied` when the key's
    attributes do not satisfy the ciphertext policy."""
    be, formula, c0, rows_ct, sealed = _decode_ct(ciphertext)
    matrix = to_share_matrix(parse_formula(formula))
    if len(matrix.rows) != len(rows_ct):
        raise CodecError("ciphertext row count disagrees with its policy")
    coeffs = reconstruction_coefficients(matrix, sk.attrs, be.order)
    if coeffs is None:
        raise AccessDenied("attributes do not satisfy the ciphertext policy")

    num = be.pair(c0, sk.k)
    denom: GroupElement | None = None
    for i, w in coeffs.items():
        attr = matrix.row_attrs[i]
        c_i, d_i = rows_ct[i]
        term = be.mul(be.pair(c_i, sk.l), be.pair(sk.k_attr[attr], d_i))
        term = be.exp(term, w)
        denom = term if denom is None else be.mul(denom, term)
    session = be.mul(num, be.inv(denom)) if denom is not None else num
    dem_key = aead.hkdf(be.encode(session), b"abe-dem")
    try:
        return aead.aes_open(dem_key, sealed)
    except CorruptBundle:
        raise CorruptBundle("ABE payload failed authentication")
