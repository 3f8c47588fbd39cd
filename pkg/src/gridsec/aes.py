"""AES-128 single-block cipher, implemented from the standard round functions.

Serves as the encryption baseline for cost comparisons.  The plain path uses
precomputed S-box tables.  The counted path (an OpCount passed in) disables
table lookups: every byte substitution computes a GF(2^8) multiplicative
inverse on the fly, MixColumns multiplications go through a counted xtime,
ShiftRows genuinely rotates packed 32-bit row words, and AddRoundKey XORs
32-bit columns.  Accounting notes:

* a GF(2^8) inverse is atomic (its internal field multiplications are not
  separately tallied, and the S-box affine step is folded into it);
* byte XORs inside MixColumns are tallied in the 32-bit XOR class (they
  execute in full-width registers);
* plain 8-bit multiplications (mul8) do not occur on this code path, every
  product here is modular.
"""

from __future__ import annotations

import struct

from .opcount import OpCount

_MASK32 = 0xFFFFFFFF

BLOCK_BYTES = 16
KEY_BYTES = 16
ROUNDS = 10


class LengthError(ValueError):
    """Key or block has the wrong byte length."""


def _xtime_raw(b: int) -> int:
    return ((b << 1) ^ 0x1B) & 0xFF if b & 0x80 else (b << 1)


def _gmul_raw(a: int, b: int) -> int:
    p = 0
    while b:
        if b & 1:
            p ^= a
        a = _xtime_raw(a)
        b >>= 1
    return p


def _gf8_inv_raw(a: int) -> int:
    # a^254 by square-and-multiply; inverse of 0 is defined as 0 (S-box rule).
    if a == 0:
        return 0
    result = 1
    power = a
    for bit in range(8):
        if (254 >> bit) & 1:
            result = _gmul_raw(result, power)
        power = _gmul_raw(power, power)
    return result


def _affine(y: int) -> int:
    s = y
    for r in (1, 2, 3, 4):
        s ^= ((y << r) | (y >> (8 - r))) & 0xFF
    return s ^ 0x63


SBOX = bytes(_affine(_gf8_inv_raw(x)) for x in range(256))
INV_SBOX = bytearray(256)
for _x, _s in enumerate(SBOX):
    INV_SBOX[_s] = _x
INV_SBOX = bytes(INV_SBOX)

_RCON = (0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36)

# ShiftRows as a flat permutation of the column-major state.
_SHIFT_ROWS = tuple(4 * ((c + r) % 4) + r for c in range(4) for r in range(4))
_INV_SHIFT_ROWS = tuple(4 * ((c - r) % 4) + r for c in range(4) for r in range(4))


def key_schedule(key: bytes) -> list[bytes]:
    """Expand a 16-byte key into 11 round keys (column-major 16-byte each)."""
    if len(key) != KEY_BYTES:
        raise LengthError(f"AES-128 key must be {KEY_BYTES} bytes, got {len(key)}")
    words = [list(key[4 * i : 4 * i + 4]) for i in range(4)]
    for i in range(4, 44):
        tmp = list(words[i - 1])
        if i % 4 == 0:
            tmp = tmp[1:] + tmp[:1]
            tmp = [SBOX[b] for b in tmp]
            tmp[0] ^= _RCON[i // 4 - 1]
        words.append([a ^ b for a, b in zip(words[i - 4], tmp)])
    return [bytes(b for w in words[4 * r : 4 * r + 4] for b in w) for r in range(11)]


def _key_schedule_counted(key: bytes, ops: OpCount) -> list[bytes]:
    words = [list(key[4 * i : 4 * i + 4]) for i in range(4)]
    for i in range(4, 44):
        tmp = list(words[i - 1])
        if i % 4 == 0:
            tmp = tmp[1:] + tmp[:1]  # RotWord: one 32-bit rotate
            ops.shift32 += 1
            tmp = [_affine(_gf8_inv_raw(b)) for b in tmp]
            ops.gf8_inv += 4
            tmp[0] ^= _RCON[i // 4 - 1]
            ops.xor32 += 1
        words.append([a ^ b for a, b in zip(words[i - 4], tmp)])
        ops.xor32 += 1  # word-wide XOR with w[i-4]
    return [bytes(b for w in words[4 * r : 4 * r + 4] for b in w) for r in range(11)]


def _encrypt_block_plain(block: bytes, round_keys: list[bytes]) -> bytes:
    s = bytearray(a ^ b for a, b in zip(block, round_keys[0]))
    for rnd in range(1, ROUNDS + 1):
        t = bytes(SBOX[s[j]] for j in _SHIFT_ROWS)
        rk = round_keys[rnd]
        if rnd < ROUNDS:
            s = bytearray(16)
            for c in range(0, 16, 4):
                a0, a1, a2, a3 = t[c], t[c + 1], t[c + 2], t[c + 3]
                x = a0 ^ a1 ^ a2 ^ a3
                s[c] = a0 ^ x ^ _xtime_raw(a0 ^ a1) ^ rk[c]
                s[c + 1] = a1 ^ x ^ _xtime_raw(a1 ^ a2) ^ rk[c + 1]
                s[c + 2] = a2 ^ x ^ _xtime_raw(a2 ^ a3) ^ rk[c + 2]
                s[c + 3] = a3 ^ x ^ _xtime_raw(a3 ^ a0) ^ rk[c + 3]
        else:
            s = bytearray(a ^ b for a, b in zip(t, rk))
    return bytes(s)


def _add_round_key_counted(s: bytearray, rk: bytes, ops: OpCount) -> bytearray:
    out = bytearray(16)
    for c in range(0, 16, 4):
        col = struct.unpack_from(">I", bytes(s), c)[0] ^ struct.unpack_from(">I", rk, c)[0]
        ops.xor32 += 1
        struct.pack_into(">I", out, c, col)
    return out


def _encrypt_block_counted(block: bytes, round_keys: list[bytes], ops: OpCount) -> bytes:
    s = _add_round_key_counted(bytearray(block), round_keys[0], ops)
    for rnd in range(1, ROUNDS + 1):
        sub = bytearray(16)
        for j in range(16):
            sub[j] = _affine(_gf8_inv_raw(s[j]))
            ops.gf8_inv += 1
        # ShiftRows on packed 32-bit row words (rows 1..3 rotate).
        rows = [struct.unpack(">I", bytes(sub[r::4]))[0] for r in range(4)]
        for r in range(1, 4):
            rows[r] = ((rows[r] << (8 * r)) | (rows[r] >> (32 - 8 * r))) & _MASK32
            ops.shift32 += 1
        t = bytearray(16)
        for r in range(4):
            for c, byte in enumerate(struct.pack(">I", rows[r])):
                t[4 * c + r] = byte
        if rnd < ROUNDS:
            mixed = bytearray(16)
            for c in range(0, 16, 4):
                a0, a1, a2, a3 = t[c], t[c + 1], t[c + 2], t[c + 3]
                x = a0 ^ a1 ^ a2 ^ a3
                ops.xor32 += 3
                for k, (ai, aj) in enumerate(((a0, a1), (a1, a2), (a2, a3), (a3, a0))):
                    prod = _xtime_raw(ai ^ aj)
                    ops.gf8_mul += 1
                    mixed[c + k] = ai ^ x ^ prod
                    ops.xor32 += 3
            s = _add_round_key_counted(mixed, round_keys[rnd], ops)
        else:
            s = _add_round_key_counted(t, round_keys[rnd], ops)
    return bytes(s)


class Aes128:
    """AES-128 with a fixed key; reuses the expanded schedule across blocks."""

    def __init__(self, key: bytes, ops: OpCount | None = None):
        if len(key) != KEY_BYTES:
            raise LengthError(f"AES-128 key must be {KEY_BYTES} bytes, got {len(key)}")
        self._ops = ops
        if ops is None:
            self._round_keys = key_schedule(key)
        else:
            self._round_keys = _key_schedule_counted(key, ops)

    def encrypt_block(self, block: bytes) -> bytes:
        if len(block) != BLOCK_BYTES:
            raise LengthError(f"block must be {BLOCK_BYTES} bytes, got {len(block)}")
        if self._ops is None:
            return _encrypt_block_plain(block, self._round_keys)
        return _encrypt_block_counted(block, self._round_keys, self._ops)

    def decrypt_block(self, block: bytes) -> bytes:
        if len(block) != BLOCK_BYTES:
            raise LengthError(f"block must be {BLOCK_BYTES} bytes, got {len(block)}")
        rks = self._round_keys
        s = bytearray(a ^ b for a, b in zip(block, rks[ROUNDS]))
        for rnd in range(ROUNDS - 1, -1, -1):
            t = bytearray(16)
            for j in range(16):
                t[j] = INV_SBOX[s[_INV_SHIFT_ROWS[j]]]
            s = bytearray(a ^ b for a, b in zip(t, rks[rnd]))
            if rnd > 0:
                m = bytearray(16)
                for c in range(0, 16, 4):
                    a0, a1, a2, a3 = s[c], s[c + 1], s[c + 2], s[c + 3]
                    m[c] = _gmul_raw(a0, 14) ^ _gmul_raw(a1, 11) ^ _gmul_raw(a2, 13) ^ _gmul_raw(a3, 9)
                    m[c + 1] = _gmul_raw(a0, 9) ^ _gmul_raw(a1, 14) ^ _gmul_raw(a2, 11) ^ _gmul_raw(a3, 13)
                    m[c + 2] = _gmul_raw(a0, 13) ^ _gmul_raw(a1, 9) ^ _gmul_raw(a2, 14) ^ _gmul_raw(a3, 11)
                    m[c + 3] = _gmul_raw(a0, 11) ^ _gmul_raw(a1, 13) ^ _gmul_raw(a2, 9) ^ _gmul_raw(a3, 14)
                s = m
        return bytes(s)


def aes128_encrypt_block(key: bytes, block: bytes, ops: OpCount | None = None) -> bytes:
    """Encrypt one 16-byte block under a 16-byte key."""
    return Aes128(key, ops).encrypt_block(block)


def aes128_decrypt_block(key: bytes, block: bytes) -> bytes:
    """Decrypt one 16-byte block under a 16-byte key."""
    return Aes128(key).decrypt_block(block)
