"""Canonical, injective binary encoding for protocol states and messages.

Every value is written as a one-byte type tag followed by a 4-byte
big-endian length and the body.  Containers encode their items in order;
sets and dicts are sorted by the encoding of their members so that equal
logical values always produce identical bytes.
"""

from __future__ import annotations

import base64
import hashlib
import struct
from typing import Any

_LEN = struct.Struct(">I")


def _frame(tag: bytes, body: bytes) -> bytes:
    return tag + _LEN.pack(len(body)) + body


def encode(obj: Any) -> bytes:
    if obj is None:
        return _frame(b"N", b"")
    if obj is True:
        return _frame(b"T", b"")
    if obj is False:
        return _frame(b"F", b"")
    if isinstance(obj, int):
        width = (obj.bit_length() + 8) // 8
        return _frame(b"I", obj.to_bytes(width, "big", signed=True))
    if isinstance(obj, (bytes, bytearray)):
        return _frame(b"B", bytes(obj))
    if isinstance(obj, str):
        return _frame(b"S", obj.encode("utf-8"))
    if isinstance(obj, (tuple, list)):
        return _frame(b"L", b"".join(encode(x) for x in obj))
    if isinstance(obj, (frozenset, set)):
        return _frame(b"Z", b"".join(sorted(encode(x) for x in obj)))
    if isinstance(obj, dict):
        items = sorted(encode(k) + encode(v) for k, v in obj.items())
        return _frame(b"D", b"".join(items))
    raise TypeError(f"cannot canonically encode {type(obj).__name__}")


def digest(data: bytes, size: int = 12) -> str:
    """Short base64 digest used in trace exports."""
    return base64.b64encode(hashlib.blake2b(data, digest_size=size).digest()).decode("ascii")
