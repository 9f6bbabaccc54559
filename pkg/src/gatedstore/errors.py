"""Exception taxonomy shared by every layer."""


class GatedStoreError(Exception):
    """Base class for all errors raised by this package."""


class AccessDenied(GatedStoreError):
    """Credentials do not satisfy the policy; no plaintext is revealed."""


class EmptyAudience(GatedStoreError):
    """Every recipient is revoked; encryption is refused."""


class CorruptBundle(GatedStoreError):
    """Authentication tag failure while opening a ciphertext bundle."""


class CorruptStore(GatedStoreError):
    """A stored value no longer decodes; raised by replicas, never silent."""


class InsufficientShares(GatedStoreError):
    """Fewer than threshold decryption shares supplied."""


class InvalidShare(GatedStoreError):
    """A decryption share failed public verification."""


class LabelMismatch(GatedStoreError):
    """Decryption-share request label disagrees with the ciphertext label."""


class KeyMismatch(GatedStoreError):
    """Supplied key variant cannot decrypt this value."""


class TagMismatch(GatedStoreError):
    """Access-type tag disagrees between two values that must agree."""


class PolicySyntaxError(GatedStoreError):
    """Policy formula does not parse under the published grammar."""


class NotFound(GatedStoreError):
    """Lookup key is unknown to the queried party."""


class IntegrityFail(GatedStoreError):
    """Recovered plaintext does not match its anchored digest."""


class UnsupportedSecurityLevel(GatedStoreError):
    """Requested security level is not one of the supported levels."""


class DuplicateIdentity(GatedStoreError):
    """Identity already registered."""


class CodecError(GatedStoreError):
    """Malformed serialized value (bad magic, version, or framing)."""
