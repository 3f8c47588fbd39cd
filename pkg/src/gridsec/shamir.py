"""Threshold secret sharing for key distribution over disjoint paths.

A key is chunked into field-sized units; each chunk becomes the constant
term of a fresh random polynomial of degree t-1 over GF(q), evaluated at
x = 1..n.  Bundle i collects the x = i shares of every chunk and travels
down path i; any t bundles reconstruct the key, any t-1 leave every
candidate secret equally consistent (the secrecy audit below checks that
exhaustively for small fields).
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass

import numpy as np

from .keys import SecretKey
from .modmath import DEFAULT_PRIME, is_prime, lagrange_at_zero, poly_eval

# Production floor for key material; small worked examples bypass split().
MIN_KEY_BITS = 16
MAX_KEY_BITS = 4096


class PolicyError(ValueError):
    """Threshold policy violates its invariants."""


class InsufficientSharesError(ValueError):
    """Fewer than t shares supplied for some chunk."""


class MalformedSharesError(ValueError):
    """Shares duplicated, inconsistent, or out of field range."""


@dataclass(frozen=True)
class ThresholdPolicy:
    t: int
    n: int
    q: int = DEFAULT_PRIME

    def __post_init__(self) -> None:
        if not 1 <= self.t <= self.n:
            raise PolicyError(f"need 1 <= t <= n, got t={self.t}, n={self.n}")
        if not is_prime(self.q):
            raise PolicyError(f"modulus {self.q} is not prime")
        if self.q <= self.n:
            raise PolicyError(f"modulus {self.q} must exceed the share count {self.n}")

    @property
    def chunk_bits(self) -> int:
        return self.q.bit_length() - 1


@dataclass(frozen=True)
class Share:
    chunk_index: int
    x: int
    y: int

    def __post_init__(self) -> None:
        if self.x == 0:
            raise MalformedSharesError("share at x=0 would expose the secret directly")


@dataclass(frozen=True)
class ShareBundle:
    """All shares travelling down one path (a common x across chunks)."""

    x: int
    shares: tuple[Share, ...]


def split(key: SecretKey, policy: ThresholdPolicy, seed: int) -> list[ShareBundle]:
    """Split a key into n bundles, any t of which reconstruct it."""
    if not MIN_KEY_BITS <= key.bits <= MAX_KEY_BITS:
        raise ValueError(f"key length {key.bits} outside [{MIN_KEY_BITS}, {MAX_KEY_BITS}]")
    rng = random.Random(seed)
    u = policy.chunk_bits
    nchunks = -(-key.bits // u)
    per_x: dict[int, list[Share]] = {x: [] for x in range(1, policy.n + 1)}
    for ci in range(nchunks):
        chunk, _ = key.slice_bits(ci * u, min((ci + 1) * u, key.bits))
        coeffs = [chunk] + [rng.randrange(policy.q) for _ in range(policy.t - 1)]
        for x in range(1, policy.n + 1):
            per_x[x].append(Share(chunk_index=ci, x=x, y=poly_eval(coeffs, x, policy.q)))
    return [ShareBundle(x=x, shares=tuple(per_x[x])) for x in range(1, policy.n + 1)]


def _chunk_widths(key_bits: int, policy: ThresholdPolicy) -> list[int]:
    u = policy.chunk_bits
    nchunks = -(-key_bits // u)
    widths = [u] * nchunks
    widths[-1] = key_bits - u * (nchunks - 1)
    return widths


def reconstruct(
    shares: list[Share] | list[ShareBundle], policy: ThresholdPolicy, key_bits: int
) -> SecretKey:
    """Lagrange-interpolate each chunk at x=0 and reassemble the key.

    The key's bit length is not recoverable from shares (chunk values do not
    expose leading zeros), so the caller supplies it.
    """
    flat: list[Share] = []
    for item in shares:
        if isinstance(item, ShareBundle):
            flat.extend(item.shares)
        else:
            flat.append(item)
    by_chunk: dict[int, list[Share]] = {}
    for share in flat:
        by_chunk.setdefault(share.chunk_index, []).append(share)

    widths = _chunk_widths(key_bits, policy)
    if sorted(by_chunk) != list(range(len(widths))):
        raise MalformedSharesError(
            f"expected chunks 0..{len(widths) - 1} for a {key_bits}-bit key, got {sorted(by_chunk)}"
        )
    value = 0
    for ci, width in enumerate(widths):
        group = by_chunk[ci]
        xs = [s.x for s in group]
        if len(set(xs)) != len(xs):
            raise MalformedSharesError(f"duplicate x values in chunk {ci}")
        if len(group) < policy.t:
            raise InsufficientSharesError(
                f"chunk {ci}: {len(group)} shares, threshold requires {policy.t}"
            )
        chunk = lagrange_at_zero([(s.x, s.y) for s in group], policy.q)
        if chunk >= 1 << width:
            raise MalformedSharesError(f"chunk {ci} reconstructs outside its {width}-bit range")
        value = (value << width) | chunk
    return SecretKey(value, key_bits)


MAX_AUDIT_PRIME = 101


@dataclass(frozen=True)
class SecrecyAudit:
    """Exhaustive consistency counts: candidate secret -> number of polynomials
    of degree <= t-1 with that constant term passing through the observed shares."""

    policy: ThresholdPolicy
    subset: tuple[tuple[int, int], ...]
    counts: tuple[int, ...]

    @property
    def expected_uniform_count(self) -> int:
        return self.policy.q ** max(self.policy.t - 1 - len(self.subset), 0)

    @property
    def uniform(self) -> bool:
        return all(c == self.expected_uniform_count for c in self.counts)

    @property
    def consistent_candidates(self) -> list[int]:
        return [s for s, c in enumerate(self.counts) if c > 0]


def consistency_counts(
    policy: ThresholdPolicy, points: list[tuple[int, int]]
) -> tuple[int, ...]:
    """Brute force over every coefficient tuple (a1..a_{t-1}); exact, small q only."""
    q, t = policy.q, policy.t
    if q > MAX_AUDIT_PRIME:
        raise PolicyError(f"audit needs q <= {MAX_AUDIT_PRIME}, got {q}")
    ntuples = q ** (t - 1)
    if not points:
        return tuple(ntuples for _ in range(q))
    idx = np.arange(ntuples, dtype=np.int64)
    coeffs = [(idx // q**k) % q for k in range(t - 1)]  # a_{k+1}
    required = None
    consistent = np.ones(ntuples, dtype=bool)
    for x, y in points:
        partial = np.zeros(ntuples, dtype=np.int64)
        for k, a in enumerate(coeffs):
            partial = (partial + a * pow(x, k + 1, q)) % q
        a0 = (y - partial) % q
        if required is None:
            required = a0
        else:
            consistent &= a0 == required
    counts = np.bincount(required[consistent], minlength=q)
    return tuple(int(c) for c in counts)


def secrecy_audit(
    policy: ThresholdPolicy,
    secret: int,
    seed: int = 0,
    subset_size: int | None = None,
    subset_xs: list[int] | None = None,
) -> SecrecyAudit:
    """Split a single chunk value and audit what a share subset reveals.

    With the default subset size t-1 the report must come back uniform: one
    consistent polynomial per candidate secret, i.e. the subset says nothing.
    """
    if not 0 <= secret < policy.q:
        raise ValueError(f"secret must lie in [0, {policy.q})")
    rng = random.Random(seed)
    coeffs = [secret] + [rng.randrange(policy.q) for _ in range(policy.t - 1)]
    all_points = [(x, poly_eval(coeffs, x, policy.q)) for x in range(1, policy.n + 1)]
    if subset_xs is not None:
        chosen = [p for p in all_points if p[0] in set(subset_xs)]
    else:
        size = policy.t - 1 if subset_size is None else subset_size
        chosen = all_points[:size]
    counts = consistency_counts(policy, chosen)
    return SecrecyAudit(policy=policy, subset=tuple(chosen), counts=counts)


_BUNDLE_HEAD = struct.Struct(">I")
_BUNDLE_ENTRY = struct.Struct(">IQQ")


def encode_bundle(bundle: ShareBundle) -> bytes:
    """chunk_count(4) then per chunk: chunk_index(4), x(8), y(8); big-endian."""
    for share in bundle.shares:
        if share.x >= 1 << 64 or share.y >= 1 << 64:
            raise ValueError("share coordinates exceed the 64-bit wire fields")
    out = [_BUNDLE_HEAD.pack(len(bundle.shares))]
    out += [_BUNDLE_ENTRY.pack(s.chunk_index, s.x, s.y) for s in bundle.shares]
    return b"".join(out)


def decode_bundle(buf: bytes) -> ShareBundle:
    if len(buf) < _BUNDLE_HEAD.size:
        raise MalformedSharesError("truncated bundle header")
    (count,) = _BUNDLE_HEAD.unpack_from(buf, 0)
    need = _BUNDLE_HEAD.size + count * _BUNDLE_ENTRY.size
    if len(buf) != need:
        raise MalformedSharesError(f"bundle of {len(buf)} bytes, expected {need}")
    shares = []
    for i in range(count):
        ci, x, y = _BUNDLE_ENTRY.unpack_from(buf, _BUNDLE_HEAD.size + i * _BUNDLE_ENTRY.size)
        shares.append(Share(chunk_index=ci, x=x, y=y))
    xs = {s.x for s in shares}
    if len(xs) != 1:
        raise MalformedSharesError("bundle mixes shares from different paths")
    return ShareBundle(x=xs.pop(), shares=tuple(shares))
