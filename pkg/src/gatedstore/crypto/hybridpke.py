"""Long-lived public-key encryption (KEM + AEAD hybrid).

Used wherever a single party holds a decryption key: the per-dataset digest
ciphertext and everything addressed to the trusted verifier.  Assembled
from audited primitives (X25519 key agreement, HKDF, ChaCha20-Poly1305) with
all randomness injected, so simulation runs are byte-reproducible.  Any
tampering with a ciphertext fails loudly instead of yielding a wrong
plaintext.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)

from ..errors import CorruptBundle, KeyMismatch
from . import aead

_EPH_LEN = 32


@dataclass(frozen=True)
class PkePublicKey:
    raw: bytes  # 32-byte X25519 public key

    def encode(self) -> bytes:
        return self.raw


@dataclass(frozen=True)
class PkeSecretKey:
    raw: bytes  # 32-byte X25519 private scalar

    def public_key(self) -> PkePublicKey:
        pub = X25519PrivateKey.from_private_bytes(self.raw).public_key()
        return PkePublicKey(raw=pub.public_bytes_raw())

    def encode(self) -> bytes:
        return self.raw


@dataclass(frozen=True)
class PkeKeyPair:
    pk: PkePublicKey
    sk: PkeSecretKey


def pke_generate(rng: random.Random) -> PkeKeyPair:
    sk = PkeSecretKey(raw=rng.randbytes(32))
    return PkeKeyPair(pk=sk.public_key(), sk=sk)


def _derive(shared: bytes, eph_pub: bytes, recipient: bytes, context: bytes) -> bytes:
    return aead.hkdf(shared + eph_pub + recipient, b"pke|" + context)


def pke_encrypt(
    pk: PkePublicKey, plaintext: bytes, context: bytes = b"", rng: random.Random | None = None
) -> bytes:
    rng = rng or random.Random()
    eph = X25519PrivateKey.from_private_bytes(rng.randbytes(32))
    eph_pub = eph.public_key().public_bytes_raw()
    shared = eph.exchange(X25519PublicKey.from_public_bytes(pk.raw))
    key = _derive(shared, eph_pub, pk.raw, context)
    return eph_pub + aead.stream_seal(key, plaintext, rng)


def pke_decrypt(sk: PkeSecretKey, ciphertext: bytes, context: bytes = b"") -> bytes:
    if len(ciphertext) < _EPH_LEN + aead.NONCE_LEN + 16:
        raise KeyMismatch("ciphertext too short")
    eph_pub = ciphertext[:_EPH_LEN]
    priv = X25519PrivateKey.from_private_bytes(sk.raw)
    try:
        shared = priv.exchange(X25519PublicKey.from_public_bytes(eph_pub))
    except ValueError as exc:
        raise KeyMismatch(f"bad encapsulated key: {exc}")
    key = _derive(shared, eph_pub, sk.public_key().raw, context)
    try:
        return aead.stream_open(key, ciphertext[_EPH_LEN:])
    except CorruptBundle:
        raise KeyMismatch("hybrid decryption failed (wrong key or tampered ciphertext)")
