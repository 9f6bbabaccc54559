"""Framed wire format.

Every frame is length-prefixed (u32) and starts with the header
``{magic "FBFT", version u16, epoch u64, instance u16, msg_type u8,
sender u16}`` followed by the message body packed per the message class's
field spec.  Non-protocol traffic (ledger, verifier, key center) rides the
same framing with epoch/instance zeroed and its own msg_type band.
"""

from __future__ import annotations

import struct

from ..errors import CodecError
from . import messages as M

MAGIC = b"FBFT"
VERSION = 1
_HEADER = struct.Struct(">4sHQHBH")

_BY_TYPE = {cls.MSG_TYPE: cls for cls in M.ALL_WIRE_TYPES}

_SENDER_IDS: dict[str, int] = {}
_SENDER_NAMES: dict[int, str] = {}


def register_sender(name: str, wire_id: int) -> None:
    """Map a node name to a u16 sender id for the frame header."""
    _SENDER_IDS[name] = wire_id
    _SENDER_NAMES[wire_id] = name


def _pack_field(kind: str, value) -> bytes:
    if kind == "u8":
        return struct.pack(">B", int(value))
    if kind == "u16":
        return struct.pack(">H", int(value))
    if kind == "u32":
        return struct.pack(">I", int(value))
    if kind == "u64":
        return struct.pack(">Q", int(value))
    if kind == "bytes":
        raw = bytes(value)
        return struct.pack(">I", len(raw)) + raw
    if kind == "str":
        raw = str(value).encode("utf-8")
        return struct.pack(">I", len(raw)) + raw
    if kind == "bytes_list":
        items = list(value)
        out = [struct.pack(">H", len(items))]
        for item in items:
            out.append(struct.pack(">I", len(item)) + bytes(item))
        return b"".join(out)
    raise CodecError(f"unknown field kind {kind}")


def _unpack_field(kind: str, buf: bytes, off: int):
    if kind == "u8":
        return buf[off], off + 1
    if kind == "u16":
        return struct.unpack_from(">H", buf, off)[0], off + 2
    if kind == "u32":
        return struct.unpack_from(">I", buf, off)[0], off + 4
    if kind == "u64":
        return struct.unpack_from(">Q", buf, off)[0], off + 8
    if kind == "bytes":
        (n,) = struct.unpack_from(">I", buf, off)
        off += 4
        if off + n > len(buf):
            raise CodecError("truncated bytes field")
        return buf[off : off + n], off + n
    if kind == "str":
        (n,) = struct.unpack_from(">I", buf, off)
        off += 4
        return buf[off : off + n].decode("utf-8"), off + n
    if kind == "bytes_list":
        (count,) = struct.unpack_from(">H", buf, off)
        off += 2
        items = []
        for _ in range(count):
            (n,) = struct.unpack_from(">I", buf, off)
            off += 4
            items.append(buf[off : off + n])
            off += n
        return tuple(items), off
    raise CodecError(f"unknown field kind {kind}")


def encode_frame(sender: str, msg: M.Message) -> bytes:
    """Serialize a message, returning the length-prefixed frame."""
    epoch = getattr(msg, "epoch", 0)
    instance = getattr(msg, "instance", getattr(msg, "index", getattr(msg, "proposer", 0)))
    header = _HEADER.pack(
        MAGIC, VERSION, int(epoch), int(instance), msg.MSG_TYPE, _SENDER_IDS.get(sender, 0xFFFF)
    )
    body = b"".join(_pack_field(kind, getattr(msg, name)) for name, kind in msg.FIELDS)
    frame = header + body
    return struct.pack(">I", len(frame)) + frame


def decode_frame(frame: bytes) -> tuple[str, M.Message]:
    """Inverse of :func:`encode_frame` minus the length prefix."""
    if len(frame) < _HEADER.size:
        raise CodecError("frame shorter than header")
    magic, version, _epoch, _instance, msg_type, sender_id = _HEADER.unpack_from(frame)
    if magic != MAGIC:
        raise CodecError(f"bad frame magic {magic!r}")
    if version != VERSION:
        raise CodecError(f"unsupported frame version {version}")
    cls = _BY_TYPE.get(msg_type)
    if cls is None:
        raise CodecError(f"unknown msg_type {msg_type}")
    off = _HEADER.size
    kwargs = {}
    for name, kind in cls.FIELDS:
        try:
            kwargs[name], off = _unpack_field(kind, frame, off)
        except (struct.error, IndexError):
            raise CodecError(f"truncated field {name} in {cls.__name__}")
    if off != len(frame):
        raise CodecError("trailing bytes after message body")
    sender = _SENDER_NAMES.get(sender_id, f"#{sender_id}")
    return sender, cls(**kwargs)


def read_frames(buf: bytes) -> tuple[list[tuple[str, M.Message]], bytes]:
    """Split a byte stream into complete frames, returning leftovers."""
    out = []
    off = 0
    while off + 4 <= len(buf):
        (n,) = struct.unpack_from(">I", buf, off)
        if off + 4 + n > len(buf):
            break
        out.append(decode_frame(buf[off + 4 : off + 4 + n]))
        off += 4 + n
    return out, buf[off:]
