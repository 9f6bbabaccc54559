"""Systematic Reed-Solomon coding over GF(256).

Byte column j of the payload is treated as evaluations of a polynomial of
degree < k at points 0..k-1; parity fragments extend the evaluation to
points k..n-1.  Any k fragments recover the payload.  Scaling a whole
fragment by a field constant is a single ``bytes.translate`` call, so the
hot loops run at C speed.
"""

from __future__ import annotations

from ..errors import GatedStoreError

_EXP = [0] * 512
_LOG = [0] * 256
_x = 1
for _i in range(255):
    _EXP[_i] = _x
    _LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= 0x11D
for _i in range(255, 512):
    _EXP[_i] = _EXP[_i - 255]


def _gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def _gf_div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("GF(256) division by zero")
    if a == 0:
        return 0
    return _EXP[_LOG[a] - _LOG[b] + 255]


_SCALE = [bytes(_gf_mul(c, v) for v in range(256)) for c in range(256)]


def _scaled(data: bytes, c: int) -> bytes:
    if c == 0:
        return bytes(len(data))
    if c == 1:
        return data
    return data.translate(_SCALE[c])


def _xor(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def _lagrange_coeff(xs: list[int], i: int, target: int) -> int:
    # GF(2^8): subtraction is xor
    num, den = 1, 1
    xi = xs[i]
    for j, xj in enumerate(xs):
        if j == i:
            continue
        num = _gf_mul(num, target ^ xj)
        den = _gf_mul(den, xi ^ xj)
    return _gf_div(num, den)


def encode(data: bytes, k: int, n: int) -> list[bytes]:
    """Split ``data`` into n fragments, any k of which reconstruct it.
    The first k fragments are the (zero-padded) data itself."""
    if not 1 <= k <= n <= 255:
        raise GatedStoreError(f"need 1 <= k <= n <= 255, got k={k}, n={n}")
    frag_len = max(1, (len(data) + k - 1) // k)
    padded = data.ljust(frag_len * k, b"\x00")
    frags = [padded[i * frag_len : (i + 1) * frag_len] for i in range(k)]
    xs = list(range(k))
    for target in range(k, n):
        acc = bytes(frag_len)
        for i in range(k):
            acc = _xor(acc, _scaled(frags[i], _lagrange_coeff(xs, i, target)))
        frags.append(acc)
    return frags


def decode(fragments: dict[int, bytes], k: int, orig_len: int) -> bytes:
    """Rebuild the payload from any k fragments (index -> bytes)."""
    if len(fragments) < k:
        raise GatedStoreError(f"need {k} fragments, got {len(fragments)}")
    items = sorted(fragments.items())[:k]
    xs = [i for i, _ in items]
    frag_len = len(items[0][1])
    if any(len(f) != frag_len for _, f in items):
        raise GatedStoreError("fragment lengths disagree")
    data_frags: list[bytes] = []
    for target in range(k):
        if target in fragments:
            data_frags.append(fragments[target])
            continue
        acc = bytes(frag_len)
        for i, (_, frag) in enumerate(items):
            acc = _xor(acc, _scaled(frag, _lagrange_coeff(xs, i, target)))
        data_frags.append(acc)
    out = b"".join(data_frags)
    if orig_len > len(out):
        raise GatedStoreError("original length exceeds decoded payload")
    return out[:orig_len]
