import random

import pytest

from gatedstore.crypto import pke_decrypt, pke_encrypt, pke_generate
from gatedstore.errors import KeyMismatch


@pytest.fixture(scope="module")
def pair():
    return pke_generate(random.Random(0x9E))


def test_roundtrip(pair):
    rng = random.Random(1)
    for size in (0, 1, 32, 4096):
        pt = rng.randbytes(size)
        assert pke_decrypt(pair.sk, pke_encrypt(pair.pk, pt, b"ctx", rng), b"ctx") == pt


def test_wrong_key_rejected(pair):
    other = pke_generate(random.Random(2))
    ct = pke_encrypt(pair.pk, b"secret", b"ctx", random.Random(3))
    with pytest.raises(KeyMismatch):
        pke_decrypt(other.sk, ct, b"ctx")


def test_context_binding(pair):
    ct = pke_encrypt(pair.pk, b"secret", b"ctx-a", random.Random(4))
    with pytest.raises(KeyMismatch):
        pke_decrypt(pair.sk, ct, b"ctx-b")


def test_every_bitflip_detected(pair):
    rng = random.Random(5)
    ct = pke_encrypt(pair.pk, b"payload-under-test", b"ctx", rng)
    for _ in range(300):
        mutated = bytearray(ct)
        bit = rng.randrange(len(mutated) * 8)
        mutated[bit // 8] ^= 1 << (bit % 8)
        with pytest.raises(KeyMismatch):
            pke_decrypt(pair.sk, bytes(mutated), b"ctx")


def test_randomized_ciphertexts(pair):
    a = pke_encrypt(pair.pk, b"m", b"ctx", random.Random(6))
    b = pke_encrypt(pair.pk, b"m", b"ctx", random.Random(7))
    assert a != b
    assert pke_decrypt(pair.sk, a, b"ctx") == pke_decrypt(pair.sk, b, b"ctx") == b"m"


def test_deterministic_under_injected_rng(pair):
    a = pke_encrypt(pair.pk, b"m", b"ctx", random.Random(8))
    b = pke_encrypt(pair.pk, b"m", b"ctx", random.Random(8))
    assert a == b


def test_keygen_deterministic_from_seed():
    a = pke_generate(random.Random(9))
    b = pke_generate(random.Random(9))
    assert a.pk == b.pk and a.sk == b.sk
    assert a.sk.public_key() == a.pk
