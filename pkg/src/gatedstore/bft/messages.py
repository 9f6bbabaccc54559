"""Every message that crosses a process boundary.

One dataclass per message type.  ``FIELDS`` drives the generic wire codec
in :mod:`gatedstore.bft.wire`; field kinds are ``u8 u16 u32 u64 bytes str
bytes_list`` and values are packed in declaration order after the frame
header.  The in-process simulator passes these objects by reference, the
socket transport runs them through the codec; both carry identical
information.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields


@dataclass(frozen=True)
class Message:
    MSG_TYPE = 0
    FIELDS = ()  # wire field specs; class attribute, not a dataclass field


def _msg(msg_type: int, name: str, *field_specs: tuple[str, str]):
    """Build a frozen message dataclass with wire metadata."""
    cls = dataclass(frozen=True)(
        type(
            name,
            (Message,),
            {
                "__annotations__": {fname: object for fname, _ in field_specs},
                "MSG_TYPE": msg_type,
                "FIELDS": tuple(field_specs),
            },
        )
    )
    return cls


# --- reliable broadcast (plain payloads) ---
RbcInit = _msg(1, "RbcInit", ("epoch", "u64"), ("proposer", "u16"), ("payload", "bytes"))
RbcEcho = _msg(2, "RbcEcho", ("epoch", "u64"), ("proposer", "u16"), ("payload", "bytes"))
RbcReady = _msg(3, "RbcReady", ("epoch", "u64"), ("proposer", "u16"), ("payload", "bytes"))

# --- reliable broadcast (erasure-coded payloads) ---
RbcVal = _msg(
    4,
    "RbcVal",
    ("epoch", "u64"),
    ("proposer", "u16"),
    ("orig_len", "u32"),
    ("frag_index", "u16"),
    ("frag", "bytes"),
    ("hash_list", "bytes_list"),
)
RbcEchoFrag = _msg(
    5,
    "RbcEchoFrag",
    ("epoch", "u64"),
    ("proposer", "u16"),
    ("orig_len", "u32"),
    ("frag_index", "u16"),
    ("frag", "bytes"),
    ("hash_list", "bytes_list"),
)
RbcReadyCoded = _msg(
    6, "RbcReadyCoded", ("epoch", "u64"), ("proposer", "u16"), ("root", "bytes")
)

# --- binary agreement ---
AbaBval = _msg(
    7, "AbaBval", ("epoch", "u64"), ("index", "u16"), ("round", "u32"), ("bit", "u8")
)
AbaAux = _msg(
    8, "AbaAux", ("epoch", "u64"), ("index", "u16"), ("round", "u32"), ("bit", "u8")
)
AbaDecided = _msg(9, "AbaDecided", ("epoch", "u64"), ("index", "u16"), ("bit", "u8"))

# --- storage traffic ---
SubmitWrite = _msg(
    10, "SubmitWrite", ("h", "bytes"), ("sigma", "bytes"), ("origin", "str"), ("mac", "bytes")
)
WriteAck = _msg(11, "WriteAck", ("h", "bytes"), ("ok", "u8"))
ReadRequest = _msg(12, "ReadRequest", ("h", "bytes"))
# status: 0 = not found, 1 = bundle verbatim, 2 = payload ciphertext + share
ReadResponse = _msg(
    13,
    "ReadResponse",
    ("h", "bytes"),
    ("status", "u8"),
    ("sigma", "bytes"),
    ("c_m", "bytes"),
    ("share", "bytes"),
)

# --- ledger traffic (reserved message-type band) ---
LedgerSubmit = _msg(20, "LedgerSubmit", ("ref", "u64"), ("record", "bytes"))
LedgerTxid = _msg(21, "LedgerTxid", ("ref", "u64"), ("txid", "str"))
LedgerFetch = _msg(22, "LedgerFetch", ("txid", "str"))
LedgerRecord = _msg(
    23, "LedgerRecord", ("txid", "str"), ("found", "u8"), ("record", "bytes")
)
# verifier-side pull of (access type, encrypted policy) for a session
LedgerPolicyPull = _msg(
    24, "LedgerPolicyPull", ("txid", "str"), ("requester", "str")
)
LedgerPolicy = _msg(
    25,
    "LedgerPolicy",
    ("txid", "str"),
    ("requester", "str"),
    ("found", "u8"),
    ("at", "u8"),
    ("c_p", "bytes"),
)

# --- trusted verifier ---
VerifyRequest = _msg(
    30, "VerifyRequest", ("txid", "str"), ("at", "u8"), ("c_pu", "bytes")
)
VerifierReport = _msg(
    31, "VerifierReport", ("txid", "str"), ("requester", "str"), ("res", "u8")
)

# --- key generation center ---
Register = _msg(
    40, "Register", ("identity", "str"), ("role", "str"), ("payload", "bytes")
)
RegisterAck = _msg(41, "RegisterAck", ("identity", "str"), ("ok", "u8"), ("payload", "bytes"))
StoreDatasetKey = _msg(
    42, "StoreDatasetKey", ("txid", "str"), ("at", "u8"), ("sk_rsa", "bytes")
)
StoreDatasetKeyAck = _msg(43, "StoreDatasetKeyAck", ("txid", "str"), ("ok", "u8"))
ReleaseRequest = _msg(44, "ReleaseRequest", ("txid", "str"))
# status: 0 = denied (final), 1 = granted, 2 = pending (no report on file yet)
ReleaseResponse = _msg(
    45, "ReleaseResponse", ("txid", "str"), ("status", "u8"), ("at", "u8"), ("key", "bytes")
)

# --- local timers (never serialized) ---


@dataclass(frozen=True)
class Timer(Message):
    MSG_TYPE = 255
    token: str = ""
    data: tuple = field(default_factory=tuple)


RELEASE_DENIED, RELEASE_GRANTED, RELEASE_PENDING = 0, 1, 2
READ_NOT_FOUND, READ_BUNDLE, READ_SHARE = 0, 1, 2

ALL_WIRE_TYPES = [
    RbcInit,
    RbcEcho,
    RbcReady,
    RbcVal,
    RbcEchoFrag,
    RbcReadyCoded,
    AbaBval,
    AbaAux,
    AbaDecided,
    SubmitWrite,
    WriteAck,
    ReadRequest,
    ReadResponse,
    LedgerSubmit,
    LedgerTxid,
    LedgerFetch,
    LedgerRecord,
    LedgerPolicyPull,
    LedgerPolicy,
    VerifyRequest,
    VerifierReport,
    Register,
    RegisterAck,
    StoreDatasetKey,
    StoreDatasetKeyAck,
    ReleaseRequest,
    ReleaseResponse,
]


def summary(msg: Message) -> str:
    """Short deterministic description used in trace records."""
    parts = [type(msg).__name__]
    for f in fields(msg):
        v = getattr(msg, f.name)
        if isinstance(v, bytes):
            parts.append(f"{f.name}={v[:8].hex()}:{len(v)}")
        elif isinstance(v, (list, tuple)):
            parts.append(f"{f.name}#{len(v)}")
        else:
            parts.append(f"{f.name}={v}")
    return " ".join(parts)
