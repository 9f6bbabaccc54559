"""Hybrid write and read engines.

The write engine turns a payload and a policy into the off-chain bundle and
the on-chain digest ciphertext; the read engine inverts it given matching
credentials.  Per access type:

* ABE: payload sealed under a fresh AES key; the AES key and the payload
  digest are each attribute-encrypted under the policy formula.
* BE:  payload sealed under a fresh stream key wrapped per cover node; the
  digest goes under the dataset's long-lived public key.
* TE:  payload sealed under a fresh AES key; the AES key is
  threshold-encrypted bound to the policy label; digest as in BE.

A fresh payload key is drawn per call, every path is authenticated, and a
wrong credential produces a clean denial.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..errors import KeyMismatch, TagMismatch
from ..model import AccessType, CipherBundle, Policy
from . import aead
from .abe import AbePublicKey, AbeSecretKey, abe_decrypt, abe_encrypt
from .hybridpke import PkePublicKey, PkeSecretKey, pke_decrypt, pke_encrypt
from .subtree import SubtreeKeyTree, be_decrypt, be_encrypt
from .te import (
    DecryptionShare,
    TeCiphertext,
    TePublicKey,
    TeVerificationKey,
    te_combine,
    te_encrypt,
)

DIGEST_CONTEXT = b"dataset-digest"


@dataclass(frozen=True)
class OwnerWriteKeys:
    """Key material an owner needs to run the write engine."""

    abe_pk: AbePublicKey | None = None
    be_tree: SubtreeKeyTree | None = None
    te_pk: TePublicKey | None = None
    rsa_pk: PkePublicKey | None = None  # per-dataset digest keypair


@dataclass(frozen=True)
class WriteResult:
    bundle: CipherBundle
    c_h: bytes
    h: bytes


def write_engine(
    m: bytes,
    at: AccessType,
    policy: Policy,
    keys: OwnerWriteKeys,
    rng: random.Random,
) -> WriteResult:
    """Encrypt ``m`` under ``policy`` and produce the digest ciphertext."""
    if policy.tag != at:
        raise TagMismatch(f"access type {at.name} does not match policy tag {policy.tag.name}")
    policy.validate()
    h = aead.sha256(m)

    if at == AccessType.ABE:
        assert keys.abe_pk is not None, "ABE public parameters required"
        key_aes = aead.fresh_key(rng)
        c_m = aead.aes_seal(key_aes, m, rng)
        x = abe_encrypt(keys.abe_pk, key_aes, policy.abe_formula, rng)
        c_h = abe_encrypt(keys.abe_pk, h, policy.abe_formula, rng)
        return WriteResult(bundle=CipherBundle(tag=at, c_m=c_m, x=x), c_h=c_h, h=h)

    if at == AccessType.BE:
        assert keys.be_tree is not None and keys.rsa_pk is not None
        bundle = be_encrypt(m, keys.be_tree, set(policy.be_revoked), rng)
        c_h = pke_encrypt(keys.rsa_pk, h, DIGEST_CONTEXT, rng)
        return WriteResult(bundle=bundle, c_h=c_h, h=h)

    assert keys.te_pk is not None and keys.rsa_pk is not None
    key_aes = aead.fresh_key(rng)
    c_m = aead.aes_seal(key_aes, m, rng)
    ct = te_encrypt(keys.te_pk, key_aes, policy.te_label, rng)
    c_h = pke_encrypt(keys.rsa_pk, h, DIGEST_CONTEXT, rng)
    return WriteResult(
        bundle=CipherBundle(tag=at, c_m=c_m, x=ct.encode(keys.te_pk.group())), c_h=c_h, h=h
    )


@dataclass(frozen=True)
class AbeReadKey:
    sk: AbeSecretKey


@dataclass(frozen=True)
class BeReadKey:
    leaf_keys: list[bytes]
    leaf_index: int


@dataclass(frozen=True)
class TeReadKey:
    vk: TeVerificationKey
    label: bytes
    shares: tuple[DecryptionShare, ...]


ReadKey = AbeReadKey | BeReadKey | TeReadKey


def read_engine(bundle: CipherBundle, key_material: ReadKey) -> bytes:
    """Recover the payload from a bundle given scheme-matching credentials."""
    if bundle.tag == AccessType.ABE:
        if not isinstance(key_material, AbeReadKey):
            raise TagMismatch("ABE bundle requires an attribute secret key")
        key_aes = abe_decrypt(key_material.sk, bundle.x)
        return aead.aes_open(key_aes, bundle.c_m)

    if bundle.tag == AccessType.BE:
        if not isinstance(key_material, BeReadKey):
            raise TagMismatch("BE bundle requires a leaf key chain")
        return be_decrypt(key_material.leaf_keys, key_material.leaf_index, bundle)

    if not isinstance(key_material, TeReadKey):
        raise TagMismatch("TE bundle requires verified decryption shares")
    grp = key_material.vk.pk.group()
    ct = TeCiphertext.decode(grp, bundle.x)
    key_aes = te_combine(key_material.vk, ct, key_material.label, key_material.shares)
    return aead.aes_open(key_aes, bundle.c_m)


def decrypt_get_hash(at: AccessType, key: AbeSecretKey | PkeSecretKey, c_h: bytes) -> bytes:
    """Open the on-chain digest ciphertext with the released key."""
    if at == AccessType.ABE:
        if not isinstance(key, AbeSecretKey):
            raise KeyMismatch("ABE digest requires an attribute secret key")
        h = abe_decrypt(key, c_h)
    else:
        if not isinstance(key, PkeSecretKey):
            raise KeyMismatch(f"{at.name} digest requires the dataset secret key")
        h = pke_decrypt(key, c_h, DIGEST_CONTEXT)
    if len(h) != 32:
        raise KeyMismatch("digest plaintext has the wrong length")
    return h
