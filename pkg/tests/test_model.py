import pytest

from gatedstore.errors import CodecError, PolicySyntaxError
from gatedstore.model import AccessType, CipherBundle, PartialAttribute, Policy


def test_access_type_bytes_stable():
    assert AccessType.BE.value == 1
    assert AccessType.ABE.value == 2
    assert AccessType.TE.value == 3
    assert AccessType.from_byte(3) is AccessType.TE
    with pytest.raises(CodecError):
        AccessType.from_byte(9)


@pytest.mark.parametrize(
    "policy",
    [
        Policy(tag=AccessType.ABE, abe_formula="(A AND B) OR C"),
        Policy(tag=AccessType.BE, be_group_size=8, be_revoked=frozenset({1, 5})),
        Policy(tag=AccessType.TE, te_label=b"lbl", te_authorized=frozenset({"u1", "u2"})),
    ],
)
def test_policy_codec_roundtrip(policy):
    assert Policy.decode(policy.encode()) == policy


def test_policy_validation():
    with pytest.raises(PolicySyntaxError):
        Policy(tag=AccessType.ABE, abe_formula="").validate()
    with pytest.raises(PolicySyntaxError):
        Policy(tag=AccessType.BE, be_group_size=4, be_revoked=frozenset({4})).validate()
    with pytest.raises(PolicySyntaxError):
        Policy(tag=AccessType.TE, te_label=b"").validate()


def test_policy_eligible_leaves():
    p = Policy(tag=AccessType.BE, be_group_size=4, be_revoked=frozenset({1}))
    assert p.eligible_leaves() == {0, 2, 3}


@pytest.mark.parametrize(
    "pu",
    [
        PartialAttribute(tag=AccessType.ABE, abe_attrs=frozenset({"A", "B"})),
        PartialAttribute(tag=AccessType.BE, be_leaf_index=7),
        PartialAttribute(tag=AccessType.TE, te_identity="req-9"),
    ],
)
def test_partial_attribute_codec_roundtrip(pu):
    assert PartialAttribute.decode(pu.encode()) == pu


def test_bundle_codec_abe_te():
    b = CipherBundle(tag=AccessType.TE, c_m=b"\x01" * 40, x=b"\x02" * 64)
    assert CipherBundle.decode(b.encode()) == b


def test_bundle_codec_be_sorted_entries():
    b = CipherBundle(
        tag=AccessType.BE,
        c_m=b"cm",
        be_entries=((2, b"w2"), (4, b"w4"), (8, b"w8")),
        be_n_leaves=8,
    )
    assert CipherBundle.decode(b.encode()) == b


def test_bundle_rejects_unsorted_entries():
    b = CipherBundle(
        tag=AccessType.BE, c_m=b"cm", be_entries=((4, b"w"), (2, b"w")), be_n_leaves=8
    )
    with pytest.raises(CodecError):
        CipherBundle.decode(b.encode())


def test_bundle_rejects_garbage():
    with pytest.raises(CodecError):
        CipherBundle.decode(b"")
    with pytest.raises(CodecError):
        CipherBundle.decode(b"\xff\xff\x00\x00")
    good = CipherBundle(tag=AccessType.TE, c_m=b"x", x=b"y").encode()
    with pytest.raises(CodecError):
        CipherBundle.decode(good + b"trailing")
