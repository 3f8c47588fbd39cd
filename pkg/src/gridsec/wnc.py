"""Winnowing-and-chaffing authenticated channel.

Every packet carries a sequence number, a payload, and a 160-bit MAC
(HMAC-SHA1 over the big-endian sequence number followed by the payload).
Wheat packets carry the correct MAC; chaff packets carry a random one and,
by default, the bitwise complement of their partner wheat's payload.  Only
a holder of the secret key can tell them apart, and the receiver winnows by
recomputing each packet's MAC.

Chaff MACs are drawn, never computed: a transmit produces exactly one MAC
computation per wheat packet regardless of the chaff ratio.  The public
:func:`make_chaff` additionally guards against the (2^-160) accident of
drawing the chaff payload's true MAC; that guard needs a MAC computation of
its own, so the transmit path skips it and relies on the odds.

``mac_truncation_bits`` shrinks the compared MAC prefix so that false-accept
statistics become observable at desk scale; it is an audit knob, production
channels run the full 160 bits.  Truncated modes still put 20 MAC bytes on
the wire (zero-padded), for wheat and chaff alike.
"""

from __future__ import annotations

import hashlib
import hmac as _hmac
import math
import random
import struct
from dataclasses import dataclass, field

MAC_BYTES = 20
MAX_PAYLOAD = 1024
MAX_SEQ = 0xFFFFFFFF

MAGIC = 0x5743
VERSION = 0x01
TYPE_DATA = 0x00
_HEADER = struct.Struct(">HBBIH")

CHAFF_COMPLEMENT = "complement"
CHAFF_RANDOM = "random"

_COMPLEMENT_TABLE = bytes(255 - i for i in range(256))


class PayloadSizeError(ValueError):
    """Payload empty or larger than the 1024-byte packet bound."""


class SequenceSpaceError(ValueError):
    """Stream needs more than 2^32 sequence numbers."""


class WeakTruncationError(ValueError):
    """MAC truncation below 64 bits requested outside audit mode."""


class FrameError(ValueError):
    """Malformed bytes on the wire."""


class IncompleteStreamError(Exception):
    """Accepted sequence numbers have a gap at end-of-stream."""

    def __init__(self, result: "WinnowResult", prefix: list[bytes]):
        self.result = result
        self.prefix = prefix
        super().__init__(
            f"incomplete stream: {len(prefix)} contiguous payloads, "
            f"{result.accepted_count} accepted, {result.rejected} rejected"
        )


@dataclass(frozen=True)
class WcPacket:
    seq: int
    payload: bytes
    mac: bytes

    def __post_init__(self) -> None:
        if not 0 <= self.seq <= MAX_SEQ:
            raise SequenceSpaceError(f"seq {self.seq} outside 32-bit range")
        if not 1 <= len(self.payload) <= MAX_PAYLOAD:
            raise PayloadSizeError(f"payload of {len(self.payload)} bytes outside [1, {MAX_PAYLOAD}]")
        if len(self.mac) != MAC_BYTES:
            raise FrameError(f"mac must be {MAC_BYTES} bytes, got {len(self.mac)}")


@dataclass
class ChannelConfig:
    key: bytes
    chaff_ratio: float = 1.0
    mac_truncation_bits: int = 160
    rng_seed: int = 0
    chaff_payload: str = CHAFF_COMPLEMENT
    audit_mode: bool = False

    def __post_init__(self) -> None:
        if not 1 <= len(self.key) <= 64:
            raise ValueError(f"channel key must be 1-64 bytes, got {len(self.key)}")
        if self.chaff_ratio < 0:
            raise ValueError("chaff_ratio must be non-negative")
        if self.mac_truncation_bits % 8 or not 8 <= self.mac_truncation_bits <= 160:
            raise ValueError("mac_truncation_bits must be one of 8, 16, ..., 160")
        if self.mac_truncation_bits < 64 and not self.audit_mode:
            raise WeakTruncationError(
                f"{self.mac_truncation_bits}-bit MACs are an audit-only setting; "
                "pass audit_mode=True to accept the false-accept risk"
            )
        if self.chaff_payload not in (CHAFF_COMPLEMENT, CHAFF_RANDOM):
            raise ValueError(f"unknown chaff_payload mode {self.chaff_payload!r}")

    @property
    def mac_prefix_bytes(self) -> int:
        return self.mac_truncation_bits // 8


class MacCallCounter:
    """Counts MAC computations; threaded through transmit/winnow by tests and the simulator."""

    def __init__(self) -> None:
        self.calls = 0


def _mac(key: bytes, seq: int, payload: bytes, counter: MacCallCounter | None = None) -> bytes:
    if counter is not None:
        counter.calls += 1
    return _hmac.new(key, struct.pack(">I", seq) + payload, hashlib.sha1).digest()


def _stored_mac(config: ChannelConfig, digest: bytes) -> bytes:
    tb = config.mac_prefix_bytes
    return digest[:tb] + b"\x00" * (MAC_BYTES - tb)


def _random_mac(config: ChannelConfig, rng: random.Random) -> bytes:
    tb = config.mac_prefix_bytes
    return rng.randbytes(tb) + b"\x00" * (MAC_BYTES - tb)


def complement(data: bytes) -> bytes:
    return data.translate(_COMPLEMENT_TABLE)


def make_wheat(
    config: ChannelConfig, seq: int, payload: bytes, counter: MacCallCounter | None = None
) -> WcPacket:
    """Wheat packet: MAC computed over BE32(seq) followed by the payload."""
    digest = _mac(config.key, seq, payload, counter)
    return WcPacket(seq=seq, payload=payload, mac=_stored_mac(config, digest))


def make_chaff(
    config: ChannelConfig,
    seq: int,
    wheat_payload: bytes,
    rng: random.Random | None = None,
    counter: MacCallCounter | None = None,
) -> WcPacket:
    """Chaff packet for the wheat with the same sequence number.

    The payload is the bitwise complement of the wheat payload (or random
    bytes in ``random`` mode); the MAC is drawn from the seeded generator and
    redrawn in the vanishingly unlikely case that it lands on the payload's
    true full-width MAC.
    """
    if rng is None:
        rng = random.Random(config.rng_seed)
    if config.chaff_payload == CHAFF_COMPLEMENT:
        payload = complement(wheat_payload)
    else:
        payload = rng.randbytes(len(wheat_payload))
    true_digest = _mac(config.key, seq, payload, counter)
    mac = _random_mac(config, rng)
    while mac == true_digest:
        mac = _random_mac(config, rng)
    return WcPacket(seq=seq, payload=payload, mac=mac)


def verify(config: ChannelConfig, packet: WcPacket, counter: MacCallCounter | None = None) -> bool:
    """True iff the packet's MAC prefix matches the recomputed one (wheat)."""
    digest = _mac(config.key, packet.seq, packet.payload, counter)
    tb = config.mac_prefix_bytes
    return packet.mac[:tb] == digest[:tb]


def transmit(
    config: ChannelConfig,
    chunks: list[bytes],
    counter: MacCallCounter | None = None,
) -> list[WcPacket]:
    """Build the outgoing packet sequence: one wheat per chunk plus interleaved chaff.

    Each wheat independently spawns floor(ratio) chaff packets plus one more
    with probability frac(ratio); each chaff lands uniformly within +/-2
    positions of its partner so pairing is not positional.  Chaff MACs come
    straight from the generator (no MAC computation; see module notes).
    """
    if len(chunks) > MAX_SEQ + 1:
        raise SequenceSpaceError(f"{len(chunks)} chunks exceed the 32-bit sequence space")
    rng = random.Random(config.rng_seed)
    whole, frac = int(math.floor(config.chaff_ratio)), config.chaff_ratio % 1.0
    packets: list[WcPacket] = []
    for seq, chunk in enumerate(chunks):
        packets.append(make_wheat(config, seq, chunk, counter))
        wheat_at = len(packets) - 1
        n_chaff = whole + (1 if frac and rng.random() < frac else 0)
        for _ in range(n_chaff):
            if config.chaff_payload == CHAFF_COMPLEMENT:
                payload = complement(chunk)
            else:
                payload = rng.randbytes(len(chunk))
            chaff = WcPacket(seq=seq, payload=payload, mac=_random_mac(config, rng))
            at = min(max(wheat_at + rng.randint(-2, 2), 0), len(packets))
            packets.insert(at, chaff)
            if at <= wheat_at:
                wheat_at += 1
    return packets


@dataclass
class WinnowResult:
    accepted: dict[int, bytes] = field(default_factory=dict)
    rejected: int = 0

    @property
    def accepted_count(self) -> int:
        return len(self.accepted)

    @property
    def payloads(self) -> list[bytes]:
        return [self.accepted[s] for s in sorted(self.accepted)]

    def contiguous_prefix(self) -> list[bytes]:
        out = []
        seq = 0
        while seq in self.accepted:
            out.append(self.accepted[seq])
            seq += 1
        return out


class Winnower:
    """Stateful receiver: feed packets as they arrive, then ``finish()``.

    A packet is accepted iff its MAC verifies and its sequence number has not
    been accepted before (keep-first); everything else counts as rejected.
    """

    def __init__(self, config: ChannelConfig, counter: MacCallCounter | None = None):
        self.config = config
        self.counter = counter
        self.result = WinnowResult()

    def feed(self, packet: WcPacket) -> bool:
        # Keep-first discards a filled seq no matter what its MAC says, so
        # don't spend a MAC computation on it.
        if packet.seq not in self.result.accepted and verify(self.config, packet, self.counter):
            self.result.accepted[packet.seq] = packet.payload
            return True
        self.result.rejected += 1
        return False

    def finish(self, require_contiguous: bool = True) -> WinnowResult:
        if require_contiguous:
            expected = set(range(len(self.result.accepted)))
            if set(self.result.accepted) != expected:
                raise IncompleteStreamError(self.result, self.result.contiguous_prefix())
        return self.result


def winnow(
    config: ChannelConfig,
    packets: list[WcPacket],
    counter: MacCallCounter | None = None,
    require_contiguous: bool = True,
) -> WinnowResult:
    """Winnow a complete packet sequence; see :class:`Winnower`."""
    w = Winnower(config, counter)
    for packet in packets:
        w.feed(packet)
    return w.finish(require_contiguous)


def encode_packet(packet: WcPacket) -> bytes:
    return (
        _HEADER.pack(MAGIC, VERSION, TYPE_DATA, packet.seq, len(packet.payload))
        + packet.payload
        + packet.mac
    )


def decode_packet(buf: bytes, offset: int = 0) -> tuple[WcPacket, int]:
    if len(buf) - offset < _HEADER.size:
        raise FrameError("truncated packet header")
    magic, version, ptype, seq, plen = _HEADER.unpack_from(buf, offset)
    if magic != MAGIC:
        raise FrameError(f"bad magic 0x{magic:04x}")
    if version != VERSION:
        raise FrameError(f"unsupported version {version}")
    if ptype != TYPE_DATA:
        raise FrameError(f"unknown packet type {ptype}")
    body_start = offset + _HEADER.size
    body_end = body_start + plen + MAC_BYTES
    if len(buf) < body_end:
        raise FrameError("truncated packet body")
    payload = buf[body_start : body_start + plen]
    mac = buf[body_start + plen : body_end]
    return WcPacket(seq=seq, payload=payload, mac=mac), body_end


def encode_stream(packets: list[WcPacket]) -> bytes:
    return b"".join(encode_packet(p) for p in packets)


def decode_stream(buf: bytes) -> list[WcPacket]:
    packets = []
    offset = 0
    while offset < len(buf):
        packet, offset = decode_packet(buf, offset)
        packets.append(packet)
    return packets


def chunk_payload(data: bytes, chunk_size: int = MAX_PAYLOAD) -> list[bytes]:
    """Split a byte stream into channel-sized chunks (empty input gives no chunks)."""
    if not 1 <= chunk_size <= MAX_PAYLOAD:
        raise PayloadSizeError(f"chunk size {chunk_size} outside [1, {MAX_PAYLOAD}]")
    return [data[i : i + chunk_size] for i in range(0, len(data), chunk_size)]
