"""Secret keys as explicit bit strings.

Both key-exchange schemes operate on bit strings whose length need not be
byte-aligned, so a key is held as an integer plus a bit length.  Bit index 0
is the most significant bit.  Hex encoding packs bits MSB-first and zero-pads
the final partial byte on the right.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

# The threshold-sharing scheme imposes a 16-bit production floor at its own
# boundary; the type itself permits shorter keys (small worked examples).
MIN_BITS = 1
MAX_BITS = 4096


class KeyLengthError(ValueError):
    """Key bit length outside the supported range."""


@dataclass(frozen=True)
class SecretKey:
    value: int
    bits: int

    def __post_init__(self) -> None:
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise KeyLengthError(f"key length {self.bits} outside [{MIN_BITS}, {MAX_BITS}]")
        if not 0 <= self.value < (1 << self.bits):
            raise ValueError("key value does not fit in the declared bit length")

    @classmethod
    def generate(cls, bits: int, rng: random.Random) -> "SecretKey":
        return cls(rng.getrandbits(bits), bits)

    @classmethod
    def from_bitstring(cls, s: str) -> "SecretKey":
        return cls(int(s, 2), len(s))

    @classmethod
    def from_hex(cls, hexstr: str, bits: int | None = None) -> "SecretKey":
        data = bytes.fromhex(hexstr)
        total = 8 * len(data)
        if bits is None:
            bits = total
        if bits > total:
            raise KeyLengthError(f"--bits {bits} exceeds the {total} bits provided")
        value = int.from_bytes(data, "big") >> (total - bits)
        return cls(value, bits)

    def to_hex(self) -> str:
        return self.to_bytes().hex()

    def to_bytes(self) -> bytes:
        """Pack MSB-first into ceil(bits/8) bytes, zero-padding the tail bits."""
        nbytes = (self.bits + 7) // 8
        return (self.value << (8 * nbytes - self.bits)).to_bytes(nbytes, "big")

    def to_bitstring(self) -> str:
        return format(self.value, f"0{self.bits}b")

    def slice_bits(self, start: int, stop: int) -> tuple[int, int]:
        """Value and width of bits [start, stop), counted from the MSB."""
        if not 0 <= start <= stop <= self.bits:
            raise ValueError(f"bit slice [{start}, {stop}) out of range for {self.bits}-bit key")
        width = stop - start
        return (self.value >> (self.bits - stop)) & ((1 << width) - 1), width
