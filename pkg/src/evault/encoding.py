"""Canonical binary encoding shared by every hashed or signed structure.

The rules are fixed and bit-exact: fields are written in declared order,
integers as 8-byte big-endian, byte strings with a 4-byte big-endian length
prefix, lists with a 4-byte count prefix, maps in ascending key order.
Nothing here depends on dict iteration order or platform endianness, so the
same value always encodes to the same bytes on every node.
"""

from __future__ import annotations

import struct

U64_MAX = 2**64 - 1


class DecodeError(ValueError):
    """Raised when a byte stream is not a well-formed canonical encoding."""


class ByteWriter:
    """Accumulates canonical-encoded fields."""

    def __init__(self) -> None:
        self._parts: list[bytes] = []

    def u8(self, value: int) -> "ByteWriter":
        if not 0 <= value <= 0xFF:
            raise ValueError(f"u8 out of range: {value}")
        self._parts.append(bytes([value]))
        return self

    def u64(self, value: int) -> "ByteWriter":
        if not 0 <= value <= U64_MAX:
            raise ValueError(f"u64 out of range: {value}")
        self._parts.append(struct.pack(">Q", value))
        return self

    def raw(self, data: bytes) -> "ByteWriter":
        """Fixed-width field, no length prefix (e.g. a 32-byte hash)."""
        self._parts.append(data)
        return self

    def bytes(self, data: bytes) -> "ByteWriter":
        self._parts.append(struct.pack(">I", len(data)))
        self._parts.append(data)
        return self

    def str(self, text: str) -> "ByteWriter":
        return self.bytes(text.encode("utf-8"))

    def bool(self, value: bool) -> "ByteWriter":
        return self.u8(1 if value else 0)

    def count(self, n: int) -> "ByteWriter":
        """List/map count prefix."""
        self._parts.append(struct.pack(">I", n))
        return self

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class ByteReader:
    """Reads back what ByteWriter wrote, raising DecodeError on malformed input."""

    def __init__(self, data: bytes) -> None:
        self._data = data
        self._pos = 0

    def u8(self) -> int:
        return self._take(1)[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self._take(8))[0]

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def bytes(self) -> bytes:
        n = struct.unpack(">I", self._take(4))[0]
        return self._take(n)

    def str(self) -> str:
        try:
            return self.bytes().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError(f"invalid UTF-8 at offset {self._pos}") from exc

    def bool(self) -> bool:
        v = self.u8()
        if v not in (0, 1):
            raise DecodeError(f"invalid bool byte {v!r}")
        return v == 1

    def count(self) -> int:
        return struct.unpack(">I", self._take(4))[0]

    def expect_end(self) -> None:
        if self._pos != len(self._data):
            raise DecodeError(
                f"{len(self._data) - self._pos} trailing bytes after decode"
            )

    def _take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise DecodeError(
                f"truncated input: need {n} bytes at offset {self._pos}, "
                f"have {len(self._data) - self._pos}"
            )
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out


def to_hex(digest: bytes) -> str:
    """Canonical text form of a digest: lowercase hex, no prefix."""
    return digest.hex()


def from_hex(text: str) -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError as exc:
        raise DecodeError(f"invalid hex string: {text!r}") from exc
