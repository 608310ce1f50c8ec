"""Variable-length integer codec shared by binary FRAT and binary DRAT/DPR.

Unsigned numbers are 7-bit little endian groups, high bit set on every byte
but the last. Signed numbers map ``n >= 0`` to ``2n`` and ``-n`` to
``2n + 1`` before unsigned encoding, so the payload value 1 never occurs.
"""

from __future__ import annotations

from .clauses import FormatError

UNSIGNED_LIMIT = 1 << 63
SIGNED_LIMIT = 1 << 62


def encode_unsigned(n: int) -> bytes:
    if not 0 <= n < UNSIGNED_LIMIT:
        raise ValueError(f"unsigned value out of range: {n}")
    out = bytearray()
    while n >= 0x80:
        out.append((n & 0x7F) | 0x80)
        n >>= 7
    out.append(n)
    return bytes(out)


def encode_signed(n: int) -> bytes:
    if not -SIGNED_LIMIT < n < SIGNED_LIMIT:
        raise ValueError(f"signed value out of range: {n}")
    return encode_unsigned(2 * n if n >= 0 else -2 * n + 1)


def decode_unsigned(buf: bytes, pos: int = 0) -> tuple[int, int]:
    """Decode one unsigned number at ``buf[pos]``; returns ``(value, next_pos)``."""
    value = 0
    shift = 0
    end = len(buf)
    while True:
        if pos >= end:
            raise FormatError("truncated varint")
        b = buf[pos]
        pos += 1
        value |= (b & 0x7F) << shift
        if not b & 0x80:
            break
        shift += 7
        if shift > 63:
            raise FormatError("varint too long")
    if value >= UNSIGNED_LIMIT:
        raise FormatError("varint exceeds 63 bits")
    return value, pos


def unsigned_to_signed(u: int) -> int:
    if u == 1:
        raise FormatError("signed payload 1 is not a valid encoding")
    return -(u >> 1) if u & 1 else u >> 1


def decode_signed(buf: bytes, pos: int = 0) -> tuple[int, int]:
    u, pos = decode_unsigned(buf, pos)
    return unsigned_to_signed(u), pos


def decode_all(buf: bytes, signed: bool = True) -> list[int]:
    """Decode a buffer holding only complete numbers."""
    out = []
    pos = 0
    dec = decode_signed if signed else decode_unsigned
    while pos < len(buf):
        v, pos = dec(buf, pos)
        out.append(v)
    return out
