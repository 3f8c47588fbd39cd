"""Wall-clock benchmark: winnowing-and-chaffing versus encrypt-then-MAC.

Both pipelines run batch implementations of their primitives compiled with
numba, transcribed straight from the standard round functions: word-oriented
SHA-1 for the MAC, byte-oriented AES-128 for the baseline cipher.  Keeping
the two sides at the same software level is the point; a hardware AES
instruction would benchmark silicon, not the algorithms whose operation
counts the analytic model compares.  Equality with the reference scalar
implementations is covered by tests.

The harness works on packed packet matrices (fixed 1024-byte payloads) with
buffers allocated once and reused across trials, so timings measure the
schemes rather than the page allocator.  Chaff rows are not physically
interleaved; the receiver's arrival order is emulated by the same statistic
the channel's placement window induces (each chaff precedes its wheat with
probability 3/5), which is what determines how many MAC checks winnowing
performs before every sequence number is filled.
"""

from __future__ import annotations

import statistics
import struct
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit, uint8, uint32

from . import sha1 as _ref_sha1
from .aes import SBOX, key_schedule

PACKET_PAYLOAD = 1024
MAC_BYTES = 20
_MAC_MSG = 4 + PACKET_PAYLOAD  # BE32(seq) followed by the payload
# Inner-hash region after the key-pad block, padded to the block grid.
_INNER_BYTES = -(-(_MAC_MSG + 9) // 64) * 64
# P(chaff arrives before its wheat) under the channel's +/-2 placement window.
CHAFF_BEFORE_P = 0.6


@njit(cache=True)
def _sha1_runs(words, state_in, out):
    """Compress rows of little-endian-loaded big-endian words from a common state.

    words: (n, 16*k) uint32 viewed from message bytes in native (little-endian)
    order; each load is byte-swapped in-register.  out: (n, 5) uint32.
    """
    n = words.shape[0]
    nwords = words.shape[1]
    w = np.empty(80, np.uint32)
    for i in range(n):
        h0 = state_in[0]
        h1 = state_in[1]
        h2 = state_in[2]
        h3 = state_in[3]
        h4 = state_in[4]
        for base in range(0, nwords, 16):
            for t in range(16):
                v = words[i, base + t]
                w[t] = (
                    (v >> 24)
                    | ((v >> 8) & uint32(0xFF00))
                    | ((v << 8) & uint32(0xFF0000))
                    | (v << 24)
                )
            for t in range(16, 80):
                x = w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16]
                w[t] = (x << 1) | (x >> 31)
            a, b, c, d, e = h0, h1, h2, h3, h4
            for t in range(20):
                tmp = uint32(uint32((a << 5) | (a >> 27)) + (d ^ (b & (c ^ d))) + e + uint32(0x5A827999) + w[t])
                e = d; d = c; c = uint32((b << 30) | (b >> 2)); b = a; a = tmp
            for t in range(20, 40):
                tmp = uint32(uint32((a << 5) | (a >> 27)) + (b ^ c ^ d) + e + uint32(0x6ED9EBA1) + w[t])
                e = d; d = c; c = uint32((b << 30) | (b >> 2)); b = a; a = tmp
            for t in range(40, 60):
                tmp = uint32(uint32((a << 5) | (a >> 27)) + ((b & c) | (d & (b | c))) + e + uint32(0x8F1BBCDC) + w[t])
                e = d; d = c; c = uint32((b << 30) | (b >> 2)); b = a; a = tmp
            for t in range(60, 80):
                tmp = uint32(uint32((a << 5) | (a >> 27)) + (b ^ c ^ d) + e + uint32(0xCA62C1D6) + w[t])
                e = d; d = c; c = uint32((b << 30) | (b >> 2)); b = a; a = tmp
            h0 = uint32(h0 + a); h1 = uint32(h1 + b); h2 = uint32(h2 + c)
            h3 = uint32(h3 + d); h4 = uint32(h4 + e)
        out[i, 0] = h0; out[i, 1] = h1; out[i, 2] = h2; out[i, 3] = h3; out[i, 4] = h4


@njit(cache=True)
def _aes128_ecb_blocks(data, rk, sbox, out):
    """Encrypt (n, 16) blocks with precomputed round keys (column-major bytes)."""
    n = data.shape[0]
    s = np.empty(16, np.uint8)
    t = np.empty(16, np.uint8)
    for i in range(n):
        for j in range(16):
            s[j] = data[i, j] ^ rk[0, j]
        for rnd in range(1, 11):
            for c in range(4):
                for r in range(4):
                    t[4 * c + r] = sbox[s[4 * ((c + r) % 4) + r]]
            if rnd < 10:
                for c in range(4):
                    a0 = t[4 * c]; a1 = t[4 * c + 1]; a2 = t[4 * c + 2]; a3 = t[4 * c + 3]
                    x = a0 ^ a1 ^ a2 ^ a3
                    v = a0 ^ a1
                    s[4 * c] = a0 ^ x ^ uint8(((v << 1) & 0xFF) ^ (0x1B if v & 0x80 else 0)) ^ rk[rnd, 4 * c]
                    v = a1 ^ a2
                    s[4 * c + 1] = a1 ^ x ^ uint8(((v << 1) & 0xFF) ^ (0x1B if v & 0x80 else 0)) ^ rk[rnd, 4 * c + 1]
                    v = a2 ^ a3
                    s[4 * c + 2] = a2 ^ x ^ uint8(((v << 1) & 0xFF) ^ (0x1B if v & 0x80 else 0)) ^ rk[rnd, 4 * c + 2]
                    v = a3 ^ a0
                    s[4 * c + 3] = a3 ^ x ^ uint8(((v << 1) & 0xFF) ^ (0x1B if v & 0x80 else 0)) ^ rk[rnd, 4 * c + 3]
            else:
                for j in range(16):
                    s[j] = t[j] ^ rk[10, j]
        for j in range(16):
            out[i, j] = s[j]


_SBOX_ARR = np.frombuffer(SBOX, dtype=np.uint8)


def _sha1_tail(total_msg_bytes: int, tail_bytes: int) -> np.ndarray:
    """SHA-1 padding occupying the last tail_bytes of the hashed region."""
    if tail_bytes < 9:
        raise ValueError("padding needs at least 9 bytes")
    tail = b"\x80" + b"\x00" * (tail_bytes - 9) + struct.pack(">Q", total_msg_bytes * 8)
    return np.frombuffer(tail, np.uint8)


def _hmac_pad_states(key: bytes) -> tuple[np.ndarray, np.ndarray]:
    if len(key) > 64:
        key = _ref_sha1.sha1(key)
    key = key + b"\x00" * (64 - len(key))
    states = []
    for pad_byte in (0x36, 0x5C):
        block = bytes(b ^ pad_byte for b in key)
        state = [0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476, 0xC3D2E1F0]
        _ref_sha1._compress(state, block, 0)
        states.append(np.array(state, np.uint32))
    return states[0], states[1]


class BatchMac:
    """HMAC-SHA1 over rows of fixed-size messages, with reusable scratch buffers."""

    def __init__(self, key: bytes, message_bytes: int, capacity: int):
        self.message_bytes = message_bytes
        self.capacity = capacity
        self.ipad_state, self.opad_state = _hmac_pad_states(key)
        region = -(-(message_bytes + 9) // 64) * 64
        self.inner = np.zeros((capacity, region), np.uint8)
        self.inner[:, message_bytes:] = _sha1_tail(64 + message_bytes, region - message_bytes)
        self.outer = np.zeros((capacity, 64), np.uint8)
        self.outer[:, MAC_BYTES:] = _sha1_tail(84, 44)
        self.digests = np.empty((capacity, 5), np.uint32)
        self.macs = np.empty((capacity, 5), np.uint32)

    def rows(self, n: int) -> np.ndarray:
        """Message area for the first n rows; caller fills it, then calls run(n)."""
        return self.inner[:n, : self.message_bytes]

    def run(self, n: int) -> np.ndarray:
        """MACs of the first n rows as (n, 5) uint32 in digest word order."""
        _sha1_runs(self.inner[:n].view(np.uint32), self.ipad_state, self.digests[:n])
        self.outer[:n, :MAC_BYTES] = (
            self.digests[:n].byteswap().view(np.uint8).reshape(n, MAC_BYTES)
        )
        _sha1_runs(self.outer[:n].view(np.uint32), self.opad_state, self.macs[:n])
        return self.macs[:n]


def batch_hmac_sha1(key: bytes, messages: np.ndarray) -> np.ndarray:
    """HMAC-SHA1 of every row of an (n, m) uint8 matrix; returns (n, 20) uint8."""
    n, m = messages.shape
    mac = BatchMac(key, m, n)
    mac.rows(n)[:] = messages
    return mac.run(n).byteswap().view(np.uint8).reshape(n, MAC_BYTES)


def aes128_ecb(key: bytes, data: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """AES-128-ECB over a flat uint8 array whose length is a multiple of 16."""
    if data.size % 16:
        raise ValueError("data length must be a multiple of 16")
    rk = np.frombuffer(b"".join(key_schedule(key)), np.uint8).reshape(11, 16)
    blocks = data.reshape(-1, 16)
    if out is None:
        out = np.empty_like(data)
    _aes128_ecb_blocks(blocks, rk, _SBOX_ARR, out.reshape(-1, 16))
    return out


def warm_up() -> None:
    """Trigger JIT compilation outside any timed region."""
    batch_hmac_sha1(b"warmup", np.zeros((2, 32), np.uint8))
    aes128_ecb(b"0123456789abcdef", np.zeros(32, np.uint8))


@dataclass
class BenchReport:
    stream_bytes: int
    chaff_ratio: float
    trials: int
    packet_payload: int = PACKET_PAYLOAD
    wnc_throughput_mbps: float = 0.0
    baseline_throughput_mbps: float = 0.0
    wnc_wire_bytes: int = 0
    baseline_wire_bytes: int = 0
    winnow_mac_checks: int = 0
    components_s: dict[str, float] = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return self.stream_bytes == 0

    def as_dict(self) -> dict:
        return {
            "stream_bytes": self.stream_bytes,
            "chaff_ratio": self.chaff_ratio,
            "trials": self.trials,
            "packet_payload": self.packet_payload,
            "wnc_throughput_mbps": round(self.wnc_throughput_mbps, 3),
            "baseline_throughput_mbps": round(self.baseline_throughput_mbps, 3),
            "wnc_wire_bytes": self.wnc_wire_bytes,
            "baseline_wire_bytes": self.baseline_wire_bytes,
            "winnow_mac_checks": self.winnow_mac_checks,
            "components_s": {k: round(v, 4) for k, v in self.components_s.items()},
        }


_FRAME_OVERHEAD = 10 + MAC_BYTES  # header + trailing MAC, per packet


class _Harness:
    def __init__(self, stream_bytes: int, chaff_ratio: float, seed: int):
        rng = np.random.default_rng(seed)
        self.rng = rng
        self.n = n = -(-stream_bytes // PACKET_PAYLOAD)
        self.payloads = np.zeros((n, PACKET_PAYLOAD), np.uint8)
        flat = rng.integers(0, 256, stream_bytes, dtype=np.uint8, endpoint=False)
        self.payloads.reshape(-1)[:stream_bytes] = flat
        self.seq_be = np.arange(n, dtype=np.uint64).astype(">u4").view(np.uint8).reshape(n, 4)

        self.n_chaff = nc = int(round(n * chaff_ratio))
        # Chaff j partners wheat j % n, so seq i's k-th chaff sits in row i + k*n.
        # How many of a wheat's chaff precede it follows the placement window's
        # 3/5 statistic.
        self.chaff_partner = np.arange(nc) % n if nc else np.zeros(0, np.intp)
        chaff_per_wheat = np.bincount(self.chaff_partner, minlength=n)
        self.before_counts = rng.binomial(chaff_per_wheat, CHAFF_BEFORE_P)
        self.chaff_payloads = np.empty((nc, PACKET_PAYLOAD), np.uint8)
        self.chaff_macs = np.empty((nc, MAC_BYTES), np.uint8)

        self.mac_key = b"bench-mac-key-0123456789"
        self.aes_key = b"bench-aes-key-16"[:16]
        self.tx_mac = BatchMac(self.mac_key, _MAC_MSG, n)
        self.rx_mac = BatchMac(self.mac_key, _MAC_MSG, n)
        self.wheat_macs = np.empty((n, MAC_BYTES), np.uint8)
        self.ciphertext = np.zeros(n * PACKET_PAYLOAD, np.uint8)
        self.accepted = np.zeros((n, PACKET_PAYLOAD), np.uint8)
        self.winnow_mac_checks = 0

    def wnc_send(self) -> None:
        n = self.n
        rows = self.tx_mac.rows(n)
        rows[:, :4] = self.seq_be
        rows[:, 4:] = self.payloads
        self.wheat_macs[:] = self.tx_mac.run(n).byteswap().view(np.uint8).reshape(n, MAC_BYTES)
        if self.n_chaff:
            np.bitwise_not(self.payloads[self.chaff_partner], out=self.chaff_payloads)
            self.chaff_macs[:] = self.rng.integers(
                0, 256, (self.n_chaff, MAC_BYTES), dtype=np.uint8, endpoint=False
            )

    def wnc_winnow(self) -> None:
        """Check packets in emulated arrival order until every seq is filled.

        Chaff that arrives after its wheat is never MACed: its sequence number
        is already accepted, keep-first discards it outright.
        """
        n = self.n
        checks = 0
        open_idx = np.arange(n)
        depth = 0
        while open_idx.size:
            m = open_idx.size
            rows = self.rx_mac.rows(m)
            is_chaff = depth < self.before_counts[open_idx]
            chaff_rows = open_idx[is_chaff] + depth * n
            wheat_rows = open_idx[~is_chaff]
            rows[is_chaff, :4] = self.seq_be[open_idx[is_chaff]]
            rows[is_chaff, 4:] = self.chaff_payloads[chaff_rows]
            rows[~is_chaff, :4] = self.seq_be[wheat_rows]
            rows[~is_chaff, 4:] = self.payloads[wheat_rows]
            got = self.rx_mac.run(m).byteswap().view(np.uint8).reshape(m, MAC_BYTES)
            checks += m
            stored = np.empty((m, MAC_BYTES), np.uint8)
            stored[is_chaff] = self.chaff_macs[chaff_rows]
            stored[~is_chaff] = self.wheat_macs[wheat_rows]
            ok = np.all(got == stored, axis=1)
            accepted_wheat = open_idx[ok & ~is_chaff]
            self.accepted[accepted_wheat] = self.payloads[accepted_wheat]
            open_idx = open_idx[~ok]
            depth += 1
            if depth > self.n_chaff + 2:
                raise AssertionError("winnow failed to converge")
        self.winnow_mac_checks = checks

    def baseline(self) -> None:
        n = self.n
        aes128_ecb(self.aes_key, self.payloads.reshape(-1), out=self.ciphertext)
        rows = self.tx_mac.rows(n)
        rows[:, :4] = self.seq_be
        rows[:, 4:] = self.ciphertext.reshape(n, PACKET_PAYLOAD)
        self.tx_mac.run(n)


def run_bench(stream_bytes: int, chaff_ratio: float, trials: int, seed: int = 0) -> BenchReport:
    """Median-of-trials throughput for W&C send+winnow and the AES+HMAC baseline."""
    if stream_bytes == 0:
        return BenchReport(stream_bytes=0, chaff_ratio=chaff_ratio, trials=0)
    if trials < 1:
        raise ValueError("need at least one trial")
    warm_up()
    h = _Harness(stream_bytes, chaff_ratio, seed)

    wnc_times, base_times = [], []
    components: dict[str, list[float]] = {"wnc_send": [], "wnc_winnow": [], "baseline": []}
    for _ in range(trials):
        t0 = time.perf_counter()
        h.wnc_send()
        t1 = time.perf_counter()
        h.wnc_winnow()
        t2 = time.perf_counter()
        if not np.array_equal(h.accepted, h.payloads):
            raise AssertionError("winnow did not recover the payload stream")
        t3 = time.perf_counter()
        h.baseline()
        t4 = time.perf_counter()
        wnc_times.append(t2 - t0)
        base_times.append(t4 - t3)
        components["wnc_send"].append(t1 - t0)
        components["wnc_winnow"].append(t2 - t1)
        components["baseline"].append(t4 - t3)

    mib = stream_bytes / 2**20
    frame = PACKET_PAYLOAD + _FRAME_OVERHEAD
    return BenchReport(
        stream_bytes=stream_bytes,
        chaff_ratio=chaff_ratio,
        trials=trials,
        wnc_throughput_mbps=mib / statistics.median(wnc_times),
        baseline_throughput_mbps=mib / statistics.median(base_times),
        wnc_wire_bytes=(h.n + h.n_chaff) * frame,
        baseline_wire_bytes=h.n * frame,
        winnow_mac_checks=h.winnow_mac_checks,
        components_s={k: statistics.median(v) for k, v in components.items()},
    )
