"""Messages exchanged between workers and their byte encoding.

STATE    0x00, u16 count k, then k x (target, flag 0x00 bottom / 0x01 present, [map value])
CONTROL  0x01, u8 code (0 FLUSH, 1 ITERATE, 2 TERMINATE), u8 witness flag, [witness]
TOKEN    0x02, u8 color, i64 q, u8 flags (bit0 dominated-zero, bit1 cycle found), [witness]

All integers are big-endian. States have the model's fixed width, so a
payload is decodable given that width. TCP frames prefix each payload with
its u32 length.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Union

from .safra import Color, Token

TAG_STATE, TAG_CONTROL, TAG_TOKEN = 0x00, 0x01, 0x02
MAX_BATCH = 0xFFFF


class ControlCode(IntEnum):
    FLUSH = 0
    ITERATE = 1
    TERMINATE = 2


@dataclass(frozen=True)
class StateBatch:
    records: tuple[tuple[bytes, bytes | None], ...]

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class Control:
    code: ControlCode
    witness: bytes | None = None


Message = Union[StateBatch, Control, Token]


class WireError(ValueError):
    pass


def encode_message(msg: Message) -> bytes:
    if isinstance(msg, StateBatch):
        if len(msg.records) > MAX_BATCH:
            raise WireError(f"batch of {len(msg.records)} exceeds {MAX_BATCH}")
        parts = [struct.pack(">BH", TAG_STATE, len(msg.records))]
        for target, value in msg.records:
            parts.append(target)
            if value is None:
                parts.append(b"\x00")
            else:
                parts.append(b"\x01")
                parts.append(value)
        return b"".join(parts)
    if isinstance(msg, Control):
        head = struct.pack(">BBB", TAG_CONTROL, msg.code, msg.witness is not None)
        return head + (msg.witness or b"")
    if isinstance(msg, Token):
        flags = int(msg.dominated_zero) | (int(msg.cycle_found) << 1)
        head = struct.pack(">BBqB", TAG_TOKEN, msg.color, msg.q, flags)
        return head + (msg.witness or b"")
    raise TypeError(f"not a message: {msg!r}")


def decode_message(data: bytes, width: int) -> Message:
    if not data:
        raise WireError("empty payload")
    tag = data[0]
    try:
        if tag == TAG_STATE:
            (count,) = struct.unpack_from(">H", data, 1)
            pos = 3
            records = []
            for _ in range(count):
                target = data[pos : pos + width]
                flag = data[pos + width]
                pos += width + 1
                if flag == 0:
                    value = None
                elif flag == 1:
                    value = data[pos : pos + width]
                    pos += width
                else:
                    raise WireError(f"bad map-value flag {flag}")
                if len(target) != width or (value is not None and len(value) != width):
                    raise WireError("truncated STATE record")
                records.append((target, value))
            if pos != len(data):
                raise WireError("trailing bytes after STATE batch")
            return StateBatch(tuple(records))
        if tag == TAG_CONTROL:
            code, has_witness = data[1], data[2]
            witness = data[3:] if has_witness else None
            if has_witness and len(witness) != width or not has_witness and len(data) != 3:
                raise WireError("bad CONTROL witness")
            return Control(ControlCode(code), witness)
        if tag == TAG_TOKEN:
            color, q, flags = struct.unpack_from(">BqB", data, 1)
            rest = data[11:]
            if rest and len(rest) != width:
                raise WireError("bad TOKEN witness")
            return Token(Color(color), q, bool(flags & 1), bool(flags & 2), rest or None)
    except (IndexError, struct.error, ValueError) as exc:
        if isinstance(exc, WireError):
            raise
        raise WireError(f"malformed message: {exc}") from exc
    raise WireError(f"unknown tag {tag:#x}")


def kind_of(msg: Message) -> str:
    if isinstance(msg, StateBatch):
        return "STATE"
    if isinstance(msg, Control):
        return "CONTROL"
    return "TOKEN"
