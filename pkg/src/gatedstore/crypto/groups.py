"""Prime-order group arithmetic.

Two things live here:

* :class:`SchnorrGroup` -- a real prime-order subgroup of Z_p^* with fixed,
  pre-generated parameters.  The threshold-encryption scheme runs directly
  on it.

* :class:`PairingBackend` -- the abstract bilinear-group interface the
  attribute-encryption scheme is written against, together with
  :class:`ExponentPairingBackend`, the default backend.  The default backend
  tracks discrete logs internally so the bilinear map is computable, while
  every public operation still performs the modular exponentiation a real
  pairing group would pay for.  It is algebraically faithful and
  cost-realistic but NOT hardness-bearing: production deployments bind an
  audited pairing library behind the same interface.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

from ..errors import CodecError, UnsupportedSecurityLevel

try:  # optional accelerator; pure-Python pow() is the fallback
    from gmpy2 import powmod as _powmod

    def _pow(base: int, exp: int, mod: int) -> int:
        return int(_powmod(base, exp, mod))

except ImportError:  # pragma: no cover - exercised only without gmpy2
    _pow = pow

# Pre-generated Schnorr parameters: p = q*r + 1 with p, q prime and g of
# order q.  Level 128 -> 2048-bit p / 256-bit q; level 256 -> 3072/384.
_P128 = int(
    "0x9f0ee1dd6227709add14df7913b35c6d63b18983fdfbc03bee810c3c8b3b165b"
    "14279fc81cef4456b6c179d61f0a343fa642f3128e36c237f19f62f3c9a0737f"
    "1ce9b20687e2b230cccf1a820410af5b3133a88a936f5adcfbafe2a75d082625"
    "1652c4294f2174a188272d10a04de5514b711adcd1f6989cc86dad01ebfa593d"
    "1fe127a628250a9995c806bab02e9306d0687967ed94362b65005f885c36de43"
    "c402899305a91d912fdcfc5a85fe5b1dfea0906b4609125ca0b8f33e6f9a03d8"
    "f789da95d48d9865c035841f21b06c43e8fd1598ab8badcc5e073e5914d18a0a"
    "4ed1fd9c507fc08276ba89960facd9079f5e7a8917439a366c4b978c5c5d7259",
    16,
)
_Q128 = int("0xec0bfddad953fd020154a92c2c500ef914d5ce30f193a0943ce208370e387397", 16)
_G128 = int(
    "0x81efe42f886d102bbfeaf08c80ca276e296ffbb56d3639373ef807c642b73552"
    "46abcb1efde0a6b87cda6205a20067aa39f9caded8f62555efd7a397683b173e"
    "400b0ca4e87ea8f4acbe87c7efa835be899f4c348145d79ebe53322e90367dca"
    "56992d582a540b20a6ce539294d641b0a5e64edb11024cdb8bb7fc8fe09e17d2"
    "e249a9eb6109f7a9be9de4653545e1b8fff9fc1b0a219cc94750fc661f6fc1db"
    "085aa15df4727bf914299a8d32908a88877e25d92a5eb608af1633e52494dbfb"
    "c5ea2f262b385fcb0a14d40098327d9910bb47bdb2397164f6a1186551544232"
    "3b372f0bcc19e1dba8204c62c8479f1c6a0ca8c3a33d1f6043de3375e75cd3d8",
    16,
)
_P256 = int(
    "0x84abec473d0fb7cb651e897725869551123388cc4df1ccb8974289b43289c9b8"
    "f460c8dd478a4a80695017c7ab18cf6dfd9ac262e2b46033e2d4a104b4e2c1f4"
    "1e45987d9cd2d4768a5f7658c97c6da47339ec7625866409e650d93d590dde95"
    "89e32a8acc6cc70450d888a6c7f2ce41dd2bc320b10119a35c90ace6beb502c6"
    "64ad1fbb03dc76b3e1cbbaa134e432f14d2915ea1402256f3d2fec3e63e16dc5"
    "5f26465cb7d0a8b8537cd81eed9a1bf4b7b99e369e5805591da08fd85119fcf4"
    "1149b26f6a01db785437d3ed175249aabd2c72f9a6102eb900f3f2fa09c0655f"
    "8b5f9950002b6f81ed302ee2ad17b26dbd6d5e86b8c00488d5e8b876a1fd4aee"
    "af022ff0e0213b070a5e5cf34c26967bec7358172e31bfb1c84114f8d7496d12"
    "104a296f1b4bbbc87483fd3ebd7ad55bcc6af2d3a2422cd4a8be5968a3bb7b28"
    "43b210b032c299c28130fc72f02564a4786e0289a9b5c3119639f4c770c71f8b"
    "27f61d70acd0b69763bcefb3bdf9da4832682d1f284578481e573756fc415903",
    16,
)
_Q256 = int(
    "0x9b43f91adc93171cc2b09762705b86df8db0523b33411fff9e5439fac8690aaf"
    "205a1bcec2f3d9a2943c62faa966c85f",
    16,
)
_G256 = int(
    "0x46f553147e01628f9aabde91715f8997fb80456923198722e78b613b97a079bc"
    "68a529e9c0e3240d295df8c325f68cfb7bfc4358fbe1403aed63b9d0084bdc97"
    "e511f5eadfde7f8a15926b222334462c221387e60b079cf7763d4601e93664d0"
    "5933dfa4b1a09487b995e966ae0ba9b2623e5f826ea5bb0d95cb04d4c2c10126"
    "d5f0b482777ce298b6b29b2681b56d47af93f35a5c39b0265d6a96581bf882ae"
    "d000a055883f2f73d749c2d323dc3f2326d189ef99a040e5cd3f68330d49c2fc"
    "c9b754e2927d7efd60b0ea204fc898832ad04ab34efa44a64f108fe5af01e317"
    "6331bd3042ff218cff4949d74f931bb9942e405065dd6bce19622ac799709f6e"
    "cb2dbc6720f3513d3153c7eed97c3c9e68d1b22b786bdf01866466e5cdd7cd9a"
    "20b867946998e188297031844dea6fa56132289992a6abe52ba64c57d360aa5d"
    "88ea6514de845ac49328bc4e73989d73822cc880df9c993b289c0757a1e05381"
    "69fe75896af5dfcd074df487b12fc6a45f57bba4a1a0c7c9787b68ed5342bd7a",
    16,
)


class SchnorrGroup:
    """Subgroup of Z_p^* of prime order q, generator g."""

    def __init__(self, p: int, q: int, g: int):
        self.p = p
        self.q = q
        self.g = g
        self._elem_len = (p.bit_length() + 7) // 8
        self._scalar_len = (q.bit_length() + 7) // 8

    @classmethod
    def for_level(cls, level: int) -> "SchnorrGroup":
        if level == 128:
            return cls(_P128, _Q128, _G128)
        if level == 256:
            return cls(_P256, _Q256, _G256)
        raise UnsupportedSecurityLevel(f"no group parameters for level {level}")

    def exp(self, base: int, e: int) -> int:
        return _pow(base, e % self.q, self.p)

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def inv(self, a: int) -> int:
        return _pow(a, self.p - 2, self.p)

    def random_scalar(self, rng) -> int:
        return rng.randrange(1, self.q)

    def hash_to_scalar(self, *parts: bytes) -> int:
        h = hashlib.sha512()
        for part in parts:
            h.update(struct.pack(">I", len(part)))
            h.update(part)
        return int.from_bytes(h.digest(), "big") % self.q

    def hash_to_element(self, data: bytes) -> int:
        # Map into the order-q subgroup by exponentiating the generator.
        return self.exp(self.g, self.hash_to_scalar(b"h2e", data))

    def encode_element(self, a: int) -> bytes:
        return a.to_bytes(self._elem_len, "big")

    def decode_element(self, raw: bytes) -> int:
        if len(raw) != self._elem_len:
            raise CodecError("bad group element length")
        a = int.from_bytes(raw, "big")
        if not 1 <= a < self.p:
            raise CodecError("group element out of range")
        return a

    def encode_scalar(self, s: int) -> bytes:
        return (s % self.q).to_bytes(self._scalar_len, "big")

    def decode_scalar(self, raw: bytes) -> int:
        if len(raw) != self._scalar_len:
            raise CodecError("bad scalar length")
        return int.from_bytes(raw, "big") % self.q


# Group kinds for the bilinear interface.
G1, G2, GT = 1, 2, 3


@dataclass(frozen=True)
class GroupElement:
    """Element of G1, G2 or GT under a pairing backend.

    ``value`` is the materialized subgroup element (what serializes and
    compares); ``dlog`` is backend bookkeeping and must never leave the
    process.
    """

    kind: int
    value: int
    dlog: int

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GroupElement)
            and self.kind == other.kind
            and self.value == other.value
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.value))


class ExponentPairingBackend:
    """Default bilinear backend over the embedded Schnorr group.

    e(g1^a, g2^b) = gT^(a*b).  Exponentiation and pairing each cost one
    real modular exponentiation, so latency measurements taken against this
    backend have the right shape even though the discrete log of every
    element is known to the process that created it.
    """

    def __init__(self, level: int = 128):
        self.level = level
        self.grp = SchnorrGroup.for_level(level)
        self.order = self.grp.q
        self._gen = {k: GroupElement(k, self.grp.g, 1) for k in (G1, G2, GT)}

    def generator(self, kind: int) -> GroupElement:
        return self._gen[kind]

    def random_scalar(self, rng) -> int:
        return self.grp.random_scalar(rng)

    def exp(self, base: GroupElement, scalar: int) -> GroupElement:
        d = (base.dlog * scalar) % self.order
        return GroupElement(base.kind, self.grp.exp(base.value, scalar), d)

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        assert a.kind == b.kind
        return GroupElement(a.kind, self.grp.mul(a.value, b.value), (a.dlog + b.dlog) % self.order)

    def inv(self, a: GroupElement) -> GroupElement:
        return GroupElement(a.kind, self.grp.inv(a.value), (-a.dlog) % self.order)

    def pair(self, a: GroupElement, b: GroupElement) -> GroupElement:
        assert a.kind == G1 and b.kind == G2
        d = (a.dlog * b.dlog) % self.order
        return GroupElement(GT, self.grp.exp(self.grp.g, d), d)

    def hash_to_g1(self, data: bytes) -> GroupElement:
        d = self.grp.hash_to_scalar(b"h2g1", data)
        return GroupElement(G1, self.grp.exp(self.grp.g, d), d)

    def encode(self, a: GroupElement) -> bytes:
        # Test-grade backend: the dlog rides along so deserialized elements
        # stay pairable.  A production backend serializes curve points.
        return bytes([a.kind]) + self.grp.encode_element(a.value) + self.grp.encode_scalar(a.dlog)

    def decode(self, raw: bytes) -> GroupElement:
        if len(raw) != 1 + self.grp._elem_len + self.grp._scalar_len:
            raise CodecError("bad element encoding length")
        kind = raw[0]
        if kind not in (G1, G2, GT):
            raise CodecError("bad element kind")
        value = self.grp.decode_element(raw[1 : 1 + self.grp._elem_len])
        dlog = self.grp.decode_scalar(raw[1 + self.grp._elem_len :])
        return GroupElement(kind, value, dlog)
