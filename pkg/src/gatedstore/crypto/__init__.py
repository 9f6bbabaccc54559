"""Access-control cryptography: attribute, broadcast and threshold schemes
plus the hybrid write/read engines."""

from .abe import AbeKeys, AbeSecretKey, abe_decrypt, abe_encrypt, abe_keygen, abe_setup
from .engine import (
    AbeReadKey,
    BeReadKey,
    OwnerWriteKeys,
    TeReadKey,
    WriteResult,
    decrypt_get_hash,
    read_engine,
    write_engine,
)
from .hybridpke import PkeKeyPair, PkePublicKey, PkeSecretKey, pke_decrypt, pke_encrypt, pke_generate
from .subtree import SubtreeKeyTree, be_build_tree, be_cover, be_decrypt, be_encrypt
from .te import (
    DecryptionShare,
    TeCiphertext,
    TeKeys,
    te_combine,
    te_encrypt,
    te_setup,
    te_share_dec,
    te_verify_share,
)

__all__ = [
    "AbeKeys",
    "AbeSecretKey",
    "abe_setup",
    "abe_keygen",
    "abe_encrypt",
    "abe_decrypt",
    "SubtreeKeyTree",
    "be_build_tree",
    "be_cover",
    "be_encrypt",
    "be_decrypt",
    "TeKeys",
    "TeCiphertext",
    "DecryptionShare",
    "te_setup",
    "te_encrypt",
    "te_share_dec",
    "te_verify_share",
    "te_combine",
    "PkeKeyPair",
    "PkePublicKey",
    "PkeSecretKey",
    "pke_generate",
    "pke_encrypt",
    "pke_decrypt",
    "OwnerWriteKeys",
    "WriteResult",
    "write_engine",
    "read_engine",
    "decrypt_get_hash",
    "AbeReadKey",
    "BeReadKey",
    "TeReadKey",
]
