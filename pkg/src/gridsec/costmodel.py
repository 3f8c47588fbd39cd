"""Analytic operation-count model for the MAC-versus-encryption comparison.

The model's constants are the per-512-bit aggregates of the two algorithms
(for AES that aggregate already covers four 128-bit blocks); costs for larger
messages scale linearly in 512-bit units, and shorter messages round up to
one unit because the MAC input is padded to the 512-bit block boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

from .opcount import OpCount

UNIT_BITS = 512

HMAC_SHA1 = "hmac_sha1"
AES128 = "aes128"

SCHEMES = (HMAC_SHA1, AES128)

# Per-512-bit operation counts.
UNIT_COSTS = {
    HMAC_SHA1: OpCount(xor32=762, shift32=132),
    AES128: OpCount(xor32=1214, shift32=132, gf8_mul=320, mul8=44, gf8_inv=68),
}

# SHA-1 cannot take messages of 2^64 bits or more.
MAX_HMAC_MESSAGE_BITS = (1 << 64) - 1


class MessageSizeError(ValueError):
    """Message size outside the scheme's supported range."""


@dataclass(frozen=True)
class CostReport:
    scheme: str
    message_bits: int
    blocks: int
    ops: OpCount


@dataclass(frozen=True)
class ChannelCostReport:
    """Compute cost of a winnowing-and-chaffing transfer plus its wire volume.

    Compute cost covers the wheat only: chaff MACs are drawn at random, never
    calculated, so the chaff ratio affects transfer volume alone.
    """

    wheat_blocks: int
    chaff_ratio: float
    compute: CostReport
    transfer_blocks: float


def analytic_cost(scheme: str, message_bits: int) -> CostReport:
    """Operation counts for authenticating (or encrypting) a message of the given size."""
    if scheme not in UNIT_COSTS:
        raise ValueError(f"unknown scheme {scheme!r}")
    if message_bits < 1:
        raise MessageSizeError("message must be at least one bit")
    if scheme == HMAC_SHA1 and message_bits > MAX_HMAC_MESSAGE_BITS:
        raise MessageSizeError("message exceeds the 2^64-bit SHA-1 limit")
    blocks = -(-message_bits // UNIT_BITS)
    return CostReport(
        scheme=scheme,
        message_bits=message_bits,
        blocks=blocks,
        ops=UNIT_COSTS[scheme].scaled(blocks),
    )


def channel_cost(wheat_blocks: int, chaff_ratio: float) -> ChannelCostReport:
    """MAC cost and wire volume for ``wheat_blocks`` 512-bit units at the given chaff ratio."""
    if wheat_blocks < 0:
        raise ValueError("wheat_blocks must be non-negative")
    if chaff_ratio < 0:
        raise ValueError("chaff_ratio must be non-negative")
    if wheat_blocks == 0:
        compute = CostReport(scheme=HMAC_SHA1, message_bits=0, blocks=0, ops=OpCount())
    else:
        compute = analytic_cost(HMAC_SHA1, wheat_blocks * UNIT_BITS)
    return ChannelCostReport(
        wheat_blocks=wheat_blocks,
        chaff_ratio=chaff_ratio,
        compute=compute,
        transfer_blocks=wheat_blocks * (1.0 + chaff_ratio),
    )


def wallclock_bench(stream_bytes: int, chaff_ratio: float, trials: int, seed: int = 0):
    """Wall-clock comparison of the two schemes; see :mod:`gridsec.bench_engine`."""
    from . import bench_engine

    return bench_engine.run_bench(stream_bytes, chaff_ratio, trials, seed)
