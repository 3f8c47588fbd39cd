"""Temporal split-distribution of a key under a pre-shared prime.

The key is cut at N-1 random bit positions; the positions become the roots
of a monic polynomial over GF(p).  Each packet pairs one key part (padded
with random fill to a fixed-width slot, so part lengths stay hidden) with
one evaluation point of the polynomial.  Whoever knows p interpolates the
polynomial, reads the split positions off its roots, and reassembles the
key; without p the polynomial cannot be reconstructed.

Evaluation points are drawn outside [1, L-1] so that no packet carries a
zero that would hand an eavesdropper a split position.  The receiver does
not reject in-range x values though: small worked exchanges use them, and
interpolation is indifferent.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass

import numpy as np

from .keys import SecretKey
from .modmath import is_prime, lagrange_coefficients, poly_eval, poly_from_roots


class ParamError(ValueError):
    """Exchange parameters violate their invariants."""


class MalformedExchangeError(ValueError):
    """Packet set unusable: wrong count, duplicate x, bad sequence numbers."""


class TamperError(Exception):
    """Interpolant failed the monic/degree/root-count consistency check."""


@dataclass(frozen=True)
class TemporalParams:
    p: int
    L: int
    N: int

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ParamError(f"{self.p} is not prime")
        if self.p <= self.L:
            raise ParamError(f"prime {self.p} must exceed the key length {self.L}")
        if not 2 <= self.N <= self.L:
            raise ParamError(f"part count {self.N} must lie in [2, L={self.L}]")

    @property
    def slot_bytes(self) -> int:
        return -(-self.L // 8)


@dataclass(frozen=True)
class TemporalPacket:
    seq: int  # part index, 1-based
    slot: bytes
    x: int
    y: int


@dataclass(frozen=True)
class SplitPlan:
    positions: tuple[int, ...]  # strictly increasing, in [1, L-1]

    def __post_init__(self) -> None:
        if list(self.positions) != sorted(set(self.positions)):
            raise ParamError("split positions must be strictly increasing")

    def boundaries(self, L: int) -> list[int]:
        return [0, *self.positions, L]


def temporal_send(key: SecretKey, params: TemporalParams, seed: int) -> list[TemporalPacket]:
    """Split the key and emit one packet per part, in part order."""
    if key.bits != params.L:
        raise ParamError(f"key is {key.bits} bits, params say L={params.L}")
    if params.N - 1 > params.L - 1:
        raise ParamError(f"cannot place {params.N - 1} distinct splits in a {params.L}-bit key")
    x_pool = range(params.L + 1, params.p)
    if len(x_pool) < params.N:
        raise ParamError(f"prime {params.p} too small to draw {params.N} evaluation points")
    rng = random.Random(seed)
    plan = SplitPlan(tuple(sorted(rng.sample(range(1, params.L), params.N - 1))))
    coeffs = poly_from_roots(list(plan.positions), params.p)
    xs = rng.sample(x_pool, params.N)

    slot_bits = 8 * params.slot_bytes
    bounds = plan.boundaries(params.L)
    packets = []
    for i in range(params.N):
        part, width = key.slice_bits(bounds[i], bounds[i + 1])
        fill_bits = slot_bits - width
        slot_value = (part << fill_bits) | (rng.getrandbits(fill_bits) if fill_bits else 0)
        packets.append(
            TemporalPacket(
                seq=i + 1,
                slot=slot_value.to_bytes(params.slot_bytes, "big"),
                x=xs[i],
                y=poly_eval(coeffs, xs[i], params.p),
            )
        )
    return packets


def _roots_in_range(coeffs: list[int], upper: int, p: int) -> list[int]:
    """All r in [1, upper) with P(r) = 0 mod p, by exhaustive scan."""
    if p < 1 << 31:
        rs = np.arange(1, upper, dtype=np.int64)
        acc = np.full(len(rs), coeffs[-1] % p, dtype=np.int64)
        for c in reversed(coeffs[:-1]):
            acc = (acc * rs + c) % p
        return [int(r) for r in rs[acc == 0]]
    return [r for r in range(1, upper) if poly_eval(coeffs, r, p) == 0]


def temporal_receive(packets: list[TemporalPacket], params: TemporalParams) -> SecretKey:
    """Interpolate the polynomial, recover split positions from its roots, reassemble."""
    if len(packets) != params.N:
        raise MalformedExchangeError(f"expected {params.N} packets, got {len(packets)}")
    if sorted(p.seq for p in packets) != list(range(1, params.N + 1)):
        raise MalformedExchangeError("packet sequence numbers must cover 1..N exactly")
    xs = [p.x % params.p for p in packets]
    if len(set(xs)) != len(xs):
        raise MalformedExchangeError("duplicate evaluation points")
    for p_ in packets:
        if len(p_.slot) != params.slot_bytes:
            raise MalformedExchangeError(
                f"packet {p_.seq} slot is {len(p_.slot)} bytes, expected {params.slot_bytes}"
            )

    points = [(p_.x % params.p, p_.y % params.p) for p_ in packets]
    coeffs = lagrange_coefficients(points, params.p)
    if coeffs[params.N - 1] != 1:
        raise TamperError(
            f"interpolant is not monic of degree {params.N - 1} "
            f"(leading coefficient {coeffs[params.N - 1]})"
        )
    roots = _roots_in_range(coeffs, params.L, params.p)
    if len(roots) != params.N - 1:
        raise TamperError(f"found {len(roots)} split positions, expected {params.N - 1}")

    bounds = [0, *roots, params.L]
    slot_bits = 8 * params.slot_bytes
    value = 0
    for packet in sorted(packets, key=lambda p_: p_.seq):
        width = bounds[packet.seq] - bounds[packet.seq - 1]
        part = int.from_bytes(packet.slot, "big") >> (slot_bits - width) if width else 0
        value = (value << width) | part
    return SecretKey(value, params.L)


@dataclass(frozen=True)
class AttackAttempt:
    prime: int
    structurally_valid: bool
    key_hex: str | None
    detail: str


@dataclass(frozen=True)
class AttackReport:
    attempts: tuple[AttackAttempt, ...]

    @property
    def valid_decodes(self) -> list[AttackAttempt]:
        return [a for a in self.attempts if a.structurally_valid]

    @property
    def valid_rate(self) -> float:
        return len(self.valid_decodes) / len(self.attempts) if self.attempts else 0.0


def adversary_attack(
    packets: list[TemporalPacket], candidate_primes: list[int], L: int, N: int
) -> AttackReport:
    """Try to decode an observed exchange under each candidate prime.

    Reports which candidates produce a structurally valid decode (monic
    interpolant of the right degree with exactly N-1 in-range roots); an
    empirical leakage measurement, no threshold is asserted.
    """
    attempts = []
    for prime in candidate_primes:
        try:
            key = temporal_receive(packets, TemporalParams(p=prime, L=L, N=N))
        except (ParamError, MalformedExchangeError, TamperError) as exc:
            attempts.append(
                AttackAttempt(prime=prime, structurally_valid=False, key_hex=None, detail=str(exc))
            )
        else:
            attempts.append(
                AttackAttempt(
                    prime=prime, structurally_valid=True, key_hex=key.to_hex(), detail="decoded"
                )
            )
    return AttackReport(attempts=tuple(attempts))


HEADER_MAGIC = 0x5453
_EXCHANGE_HEADER = struct.Struct(">HHH")
_PACKET_HEAD = struct.Struct(">HH")
_PACKET_TAIL = struct.Struct(">QQ")


def encode_exchange(packets: list[TemporalPacket], params: TemporalParams) -> bytes:
    """Header (magic, L, N) followed by the packets: seq(2) slot_len(2) slot x(8) y(8)."""
    out = [_EXCHANGE_HEADER.pack(HEADER_MAGIC, params.L, params.N)]
    for p_ in packets:
        if p_.x >= 1 << 64 or p_.y >= 1 << 64:
            raise ValueError("evaluation pair exceeds the 64-bit wire fields")
        out.append(_PACKET_HEAD.pack(p_.seq, len(p_.slot)) + p_.slot + _PACKET_TAIL.pack(p_.x, p_.y))
    return b"".join(out)


def decode_exchange(buf: bytes) -> tuple[int, int, list[TemporalPacket]]:
    """Return (L, N, packets) from an encoded exchange."""
    if len(buf) < _EXCHANGE_HEADER.size:
        raise MalformedExchangeError("truncated exchange header")
    magic, L, N = _EXCHANGE_HEADER.unpack_from(buf, 0)
    if magic != HEADER_MAGIC:
        raise MalformedExchangeError(f"bad exchange magic 0x{magic:04x}")
    packets = []
    offset = _EXCHANGE_HEADER.size
    while offset < len(buf):
        if len(buf) - offset < _PACKET_HEAD.size:
            raise MalformedExchangeError("truncated packet header")
        seq, slot_len = _PACKET_HEAD.unpack_from(buf, offset)
        offset += _PACKET_HEAD.size
        if len(buf) - offset < slot_len + _PACKET_TAIL.size:
            raise MalformedExchangeError("truncated packet body")
        slot = buf[offset : offset + slot_len]
        offset += slot_len
        x, y = _PACKET_TAIL.unpack_from(buf, offset)
        offset += _PACKET_TAIL.size
        packets.append(TemporalPacket(seq=seq, slot=slot, x=x, y=y))
    return L, N, packets
