"""SHA-1 and HMAC-SHA1, implemented from the standard definitions.

The plain path is a straightforward word-oriented implementation.  When an
:class:`~gridsec.opcount.OpCount` is passed, a twin path runs instead that
tallies every 32-bit XOR and every 32-bit shift/rotate it executes; digests
are identical either way (covered by tests).  Additions and loads are not
counted.
"""

from __future__ import annotations

import struct

from .opcount import OpCount

_MASK32 = 0xFFFFFFFF

# Messages must stay below the 2^64-bit SHA-1 limit.
_MAX_MESSAGE_BYTES = 1 << 61

BLOCK_BYTES = 64
DIGEST_BYTES = 20


class MessageTooLongError(ValueError):
    """Message exceeds the 2^64-bit SHA-1 input limit."""


class EmptyKeyError(ValueError):
    """HMAC key must be non-empty."""


def _pad(length: int) -> bytes:
    return b"\x80" + b"\x00" * ((55 - length) % 64) + struct.pack(">Q", length * 8)


def _compress(state: list[int], block: bytes, off: int) -> None:
    w = list(struct.unpack_from(">16I", block, off))
    for t in range(16, 80):
        x = w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16]
        w.append(((x << 1) | (x >> 31)) & _MASK32)

    a, b, c, d, e = state
    for t in range(80):
        if t < 20:
            f = d ^ (b & (c ^ d))
            k = 0x5A827999
        elif t < 40:
            f = b ^ c ^ d
            k = 0x6ED9EBA1
        elif t < 60:
            f = (b & c) | (d & (b | c))
            k = 0x8F1BBCDC
        else:
            f = b ^ c ^ d
            k = 0xCA62C1D6
        tmp = ((((a << 5) | (a >> 27)) & _MASK32) + f + e + k + w[t]) & _MASK32
        e = d
        d = c
        c = ((b << 30) | (b >> 2)) & _MASK32
        b = a
        a = tmp

    state[0] = (state[0] + a) & _MASK32
    state[1] = (state[1] + b) & _MASK32
    state[2] = (state[2] + c) & _MASK32
    state[3] = (state[3] + d) & _MASK32
    state[4] = (state[4] + e) & _MASK32


def _compress_counted(state: list[int], block: bytes, off: int, ops: OpCount) -> None:
    # Same transform as _compress with a tally next to each counted op.
    w = list(struct.unpack_from(">16I", block, off))
    for t in range(16, 80):
        x = w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16]
        ops.xor32 += 3
        w.append(((x << 1) | (x >> 31)) & _MASK32)
        ops.shift32 += 1  # one circular shift

    a, b, c, d, e = state
    for t in range(80):
        if t < 20:
            f = d ^ (b & (c ^ d))
            ops.xor32 += 2
            k = 0x5A827999
        elif t < 40:
            f = b ^ c ^ d
            ops.xor32 += 2
            k = 0x6ED9EBA1
        elif t < 60:
            f = (b & c) | (d & (b | c))
            k = 0x8F1BBCDC
        else:
            f = b ^ c ^ d
            ops.xor32 += 2
            k = 0xCA62C1D6
        tmp = ((((a << 5) | (a >> 27)) & _MASK32) + f + e + k + w[t]) & _MASK32
        ops.shift32 += 1
        e = d
        d = c
        c = ((b << 30) | (b >> 2)) & _MASK32
        ops.shift32 += 1
        b = a
        a = tmp

    state[0] = (state[0] + a) & _MASK32
    state[1] = (state[1] + b) & _MASK32
    state[2] = (state[2] + c) & _MASK32
    state[3] = (state[3] + d) & _MASK32
    state[4] = (state[4] + e) & _MASK32


def sha1(message: bytes, ops: OpCount | None = None) -> bytes:
    """Return the 20-byte SHA-1 digest of ``message``."""
    if len(message) >= _MAX_MESSAGE_BYTES:
        raise MessageTooLongError(f"message of {len(message)} bytes exceeds SHA-1 limit")
    state = [0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476, 0xC3D2E1F0]
    data = message + _pad(len(message))
    if ops is None:
        for off in range(0, len(data), 64):
            _compress(state, data, off)
    else:
        for off in range(0, len(data), 64):
            _compress_counted(state, data, off, ops)
    return struct.pack(">5I", *state)


def hmac_sha1(key: bytes, message: bytes, ops: OpCount | None = None) -> bytes:
    """HMAC-SHA1 of ``message`` under ``key`` (keys longer than a block are hashed first)."""
    if not key:
        raise EmptyKeyError("HMAC key must be non-empty")
    if len(key) > BLOCK_BYTES:
        key = sha1(key, ops)
    key = key + b"\x00" * (BLOCK_BYTES - len(key))

    if ops is None:
        ipad = bytes(b ^ 0x36 for b in key)
        opad = bytes(b ^ 0x5C for b in key)
    else:
        # Pad derivation done word-wise: 16 XORs of 32-bit words per pad.
        words = struct.unpack(">16I", key)
        ipad = struct.pack(">16I", *(wd ^ 0x36363636 for wd in words))
        opad = struct.pack(">16I", *(wd ^ 0x5C5C5C5C for wd in words))
        ops.xor32 += 32

    inner = sha1(ipad + message, ops)
    return sha1(opad + inner, ops)
