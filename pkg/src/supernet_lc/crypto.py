"""Hashing and canonical encodings.

Two encodings exist on purpose:

* ``encode_fields`` is the length-prefixed binary form that every identifier
  (tx ids, token ids, block hashes, version records) is hashed over.
* ``canonical_json`` is the byte form of transaction payloads and transcript
  lines: sorted keys, no whitespace, UTF-8.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

HASH_SIZE = 32
ZERO_HASH = "0" * (2 * HASH_SIZE)
INT_WIDTH = 8


def hash_bytes(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def hash_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _field_bytes(value: Any) -> bytes:
    if isinstance(value, bool):
        return b"\x01" if value else b"\x00"
    if isinstance(value, int):
        return value.to_bytes(INT_WIDTH, "big", signed=True)
    if isinstance(value, bytes):
        return value
    if isinstance(value, str):
        return value.encode("utf-8")
    if isinstance(value, (list, tuple)):
        return encode_fields(*value)
    raise TypeError(f"cannot encode field of type {type(value).__name__}")


def encode_fields(*fields: Any) -> bytes:
    """Concatenate fields, each prefixed by its 4-byte big-endian length.

    Integers are 8-byte big-endian two's complement; nested sequences are
    encoded recursively so that ``["a", "b"]`` and ``["ab"]`` never collide.
    """
    out = bytearray()
    for value in fields:
        raw = _field_bytes(value)
        out += len(raw).to_bytes(4, "big")
        out += raw
    return bytes(out)


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def hex_to_bytes(value: str) -> bytes:
    if len(value) != 2 * HASH_SIZE:
        raise ValueError(f"expected {2 * HASH_SIZE} hex chars, got {len(value)}")
    return bytes.fromhex(value)
