"""Authenticated symmetric encryption and key derivation helpers.

Both symmetric primitives in the system are AEADs: the block-cipher path is
AES-256-GCM, the stream-cipher path is ChaCha20-Poly1305.  A sealed blob is
``nonce || ciphertext+tag`` so it travels as one self-contained byte string
and any tampering fails loudly on open.
"""

from __future__ import annotations

import hashlib
import hmac

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM, ChaCha20Poly1305

from ..errors import CorruptBundle

KEY_LEN = 32
NONCE_LEN = 12


def fresh_key(rng) -> bytes:
    return rng.randbytes(KEY_LEN)


def _seal(cipher, key: bytes, plaintext: bytes, rng, aad: bytes) -> bytes:
    nonce = rng.randbytes(NONCE_LEN)
    return nonce + cipher(key).encrypt(nonce, plaintext, aad)


def _open(cipher, key: bytes, blob: bytes, aad: bytes) -> bytes:
    if len(blob) < NONCE_LEN + 16:
        raise CorruptBundle("sealed blob too short")
    try:
        return cipher(key).decrypt(blob[:NONCE_LEN], blob[NONCE_LEN:], aad)
    except InvalidTag:
        raise CorruptBundle("authentication tag check failed")


def aes_seal(key: bytes, plaintext: bytes, rng, aad: bytes = b"") -> bytes:
    return _seal(AESGCM, key, plaintext, rng, aad)


def aes_open(key: bytes, blob: bytes, aad: bytes = b"") -> bytes:
    return _open(AESGCM, key, blob, aad)


def stream_seal(key: bytes, plaintext: bytes, rng, aad: bytes = b"") -> bytes:
    return _seal(ChaCha20Poly1305, key, plaintext, rng, aad)


def stream_open(key: bytes, blob: bytes, aad: bytes = b"") -> bytes:
    return _open(ChaCha20Poly1305, key, blob, aad)


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def hkdf(key_material: bytes, info: bytes, length: int = KEY_LEN) -> bytes:
    """HKDF-SHA256 with a fixed zero salt (keys here are already uniform)."""
    prk = hmac.new(b"\x00" * 32, key_material, hashlib.sha256).digest()
    out = b""
    block = b""
    counter = 1
    while len(out) < length:
        block = hmac.new(prk, block + info + bytes([counter]), hashlib.sha256).digest()
        out += block
        counter += 1
    return out[:length]


def xor_pad(seed: bytes, info: bytes, length: int) -> bytes:
    """Expand ``seed`` into a pad of arbitrary length (SHAKE-256)."""
    return hashlib.shake_256(seed + b"|" + info).digest(length)
