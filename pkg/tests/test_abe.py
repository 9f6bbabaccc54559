import itertools
import random

import pytest

from gatedstore.crypto import abe_decrypt, abe_encrypt, abe_keygen, abe_setup
from gatedstore.crypto.lsss import evaluate, parse_formula
from gatedstore.errors import (
    AccessDenied,
    CorruptBundle,
    GatedStoreError,
    PolicySyntaxError,
    UnsupportedSecurityLevel,
)


@pytest.fixture(scope="module")
def keys():
    return abe_setup(128, random.Random(0xABE))


def test_setup_roundtrip_contract(keys):
    rng = random.Random(1)
    sk = abe_keygen(keys, {"A"}, rng)
    ct = abe_encrypt(keys.pk, b"\x00" * 32, "A", rng)
    assert abe_decrypt(sk, ct) == b"\x00" * 32


def test_setup_is_randomized():
    a = abe_setup(128, random.Random(1))
    b = abe_setup(128, random.Random(2))
    assert a.pk != b.pk


def test_setup_deterministic_under_seed():
    a = abe_setup(128, random.Random(5))
    b = abe_setup(128, random.Random(5))
    assert a.pk == b.pk and a.msk == b.msk


def test_setup_rejects_unknown_level():
    with pytest.raises(UnsupportedSecurityLevel):
        abe_setup(192)


def test_kilobyte_payload_three_attr_policy(keys):
    rng = random.Random(2)
    payload = rng.randbytes(1024)
    ct = abe_encrypt(keys.pk, payload, "A AND B AND C", rng)
    sk = abe_keygen(keys, {"A", "B", "C"}, rng)
    assert abe_decrypt(sk, ct) == payload


def test_keygen_requires_attrs(keys):
    with pytest.raises(GatedStoreError):
        abe_keygen(keys, set())


def test_satisfying_and_nonsatisfying(keys):
    rng = random.Random(3)
    ct = abe_encrypt(keys.pk, b"m", "A AND B", rng)
    assert abe_decrypt(abe_keygen(keys, {"A", "B"}, rng), ct) == b"m"
    with pytest.raises(AccessDenied):
        abe_decrypt(abe_keygen(keys, {"A"}, rng), ct)
    with pytest.raises(AccessDenied):
        abe_decrypt(abe_keygen(keys, {"B"}, rng), ct)


def test_all_subsets_against_two_clause_policy(keys):
    # success iff the brute-force boolean evaluation says so
    rng = random.Random(4)
    formula = "(A AND B) OR (C AND D AND E)"
    node = parse_formula(formula)
    ct = abe_encrypt(keys.pk, b"payload", formula, rng)
    universe = ["A", "B", "C", "D", "E"]
    for r in range(1, len(universe) + 1):
        for subset in itertools.combinations(universe, r):
            sk = abe_keygen(keys, set(subset), rng)
            if evaluate(node, set(subset)):
                assert abe_decrypt(sk, ct) == b"payload", subset
            else:
                with pytest.raises(AccessDenied):
                    abe_decrypt(sk, ct)


def test_ten_attribute_policy_roundtrips(keys):
    rng = random.Random(5)
    attrs = [f"ATTR{i}" for i in range(10)]
    formula = " AND ".join(attrs)
    ct = abe_encrypt(keys.pk, b"ten", formula, rng)
    sk = abe_keygen(keys, set(attrs), rng)
    assert abe_decrypt(sk, ct) == b"ten"


def test_malformed_formula_rejected(keys):
    with pytest.raises(PolicySyntaxError):
        abe_encrypt(keys.pk, b"m", "A AND")


def test_tampered_ciphertext_fails_loudly(keys):
    rng = random.Random(6)
    ct = bytearray(abe_encrypt(keys.pk, b"m", "A", rng))
    ct[-1] ^= 0x01  # flip inside the sealed payload
    sk = abe_keygen(keys, {"A"}, rng)
    with pytest.raises(CorruptBundle):
        abe_decrypt(sk, bytes(ct))


def test_keys_do_not_cross_setups():
    rng = random.Random(7)
    k1 = abe_setup(128, random.Random(10))
    k2 = abe_setup(128, random.Random(11))
    ct = abe_encrypt(k1.pk, b"m", "A", rng)
    foreign = abe_keygen(k2, {"A"}, rng)
    with pytest.raises((AccessDenied, CorruptBundle)):
        abe_decrypt(foreign, ct)
