"""Primitive-operation tallies shared by the instrumented crypto code and the cost model.

Only the operation classes that matter for the MAC-versus-encryption comparison
are tracked: 32-bit XORs, 32-bit shifts/rotates, GF(2^8) modular multiplications,
plain 8-bit multiplications, and GF(2^8) multiplicative inverses.  Additions,
loads, and table lookups are deliberately not counted.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class OpCount:
    """Field-wise tally of primitive operations."""

    xor32: int = 0
    shift32: int = 0
    gf8_mul: int = 0
    mul8: int = 0
    gf8_inv: int = 0

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if value < 0:
                raise ValueError(f"negative op count for {name}: {value}")

    def __add__(self, other: "OpCount") -> "OpCount":
        return OpCount(
            xor32=self.xor32 + other.xor32,
            shift32=self.shift32 + other.shift32,
            gf8_mul=self.gf8_mul + other.gf8_mul,
            mul8=self.mul8 + other.mul8,
            gf8_inv=self.gf8_inv + other.gf8_inv,
        )

    def scaled(self, factor: int) -> "OpCount":
        """Return a copy with every field multiplied by ``factor``."""
        if factor < 0:
            raise ValueError("scale factor must be non-negative")
        return OpCount(
            xor32=self.xor32 * factor,
            shift32=self.shift32 * factor,
            gf8_mul=self.gf8_mul * factor,
            mul8=self.mul8 * factor,
            gf8_inv=self.gf8_inv * factor,
        )

    def total(self) -> int:
        return self.xor32 + self.shift32 + self.gf8_mul + self.mul8 + self.gf8_inv

    def as_dict(self) -> dict[str, int]:
        return {
            "xor32": self.xor32,
            "shift32": self.shift32,
            "gf8_mul": self.gf8_mul,
            "mul8": self.mul8,
            "gf8_inv": self.gf8_inv,
        }
