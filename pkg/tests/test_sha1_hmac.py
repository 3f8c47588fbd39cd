import hashlib
import hmac as stdhmac
import random

import pytest

from gridsec.opcount import OpCount
from gridsec.sha1 import EmptyKeyError, MessageTooLongError, hmac_sha1, sha1

# Published FIPS 180-1 style vectors, re-checked against hashlib before freezing.
SHA1_VECTORS = [
    (b"", "da39a3ee5e6b4b0d3255bfef95601890afd80709"),
    (b"abc", "a9993e364706816aba3e25717850c26c9cd0d89d"),
    (
        b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq",
        "84983e441c3bd26ebaae4aa1f95129e5e54670f1",
    ),
]

# RFC 2202 HMAC-SHA1, all seven cases.
RFC2202 = [
    (b"\x0b" * 20, b"Hi There", "b617318655057264e28bc0b6fb378c8ef146be00"),
    (b"Jefe", b"what do ya want for nothing?", "effcdf6ae5eb2fa2d27416d5f184df9c259a7c79"),
    (b"\xaa" * 20, b"\xdd" * 50, "125d7342b9ac11cd91a39af48aa17b4f63f175d3"),
    (bytes(range(1, 26)), b"\xcd" * 50, "4c9007f4026250c6bc8414f9bf50c86c2d7235da"),
    (b"\x0c" * 20, b"Test With Truncation", "4c1a03424b55e07fe7f27be1d58bb9324a9a5a04"),
    (
        b"\xaa" * 80,
        b"Test Using Larger Than Block-Size Key - Hash Key First",
        "aa4ae5e15272d00e95705637ce8a3b55ed402112",
    ),
    (
        b"\xaa" * 80,
        b"Test Using Larger Than Block-Size Key and Larger Than One Block-Size Data",
        "e8e99d0f45237d786d6bbaa7965c7808bbff1a91",
    ),
]


@pytest.mark.parametrize("message,expected", SHA1_VECTORS)
def test_sha1_vectors(message, expected):
    assert sha1(message).hex() == expected


def test_sha1_million_a():
    assert sha1(b"a" * 1_000_000).hex() == "34aa973cd4c4daa4f61eeb2bdbad27316534016f"


def test_sha1_deterministic():
    m = b"some message"
    assert sha1(m) == sha1(m)


def test_sha1_matches_hashlib_on_random_inputs():
    rng = random.Random(11)
    for _ in range(300):
        m = rng.randbytes(rng.randrange(0, 300))
        assert sha1(m) == hashlib.sha1(m).digest()


@pytest.mark.parametrize("key,message,expected", RFC2202)
def test_hmac_rfc2202(key, message, expected):
    assert hmac_sha1(key, message).hex() == expected


def test_hmac_matches_stdlib_on_random_inputs():
    rng = random.Random(13)
    for _ in range(300):
        k = rng.randbytes(rng.randrange(1, 150))
        m = rng.randbytes(rng.randrange(0, 200))
        assert hmac_sha1(k, m) == stdhmac.new(k, m, hashlib.sha1).digest()


def test_single_bit_flip_changes_digest():
    # Any one-bit change to key or message must change the MAC.
    rng = random.Random(17)
    for _ in range(10_000):
        key = bytearray(rng.randbytes(rng.randrange(1, 33)))
        msg = bytearray(rng.randbytes(rng.randrange(1, 33)))
        base = hmac_sha1(bytes(key), bytes(msg))
        if rng.random() < 0.5:
            msg[rng.randrange(len(msg))] ^= 1 << rng.randrange(8)
        else:
            key[rng.randrange(len(key))] ^= 1 << rng.randrange(8)
        assert hmac_sha1(bytes(key), bytes(msg)) != base


def test_distinct_keys_give_distinct_digests():
    rng = random.Random(19)
    message = b"fixed message"
    for _ in range(1000):
        k1 = rng.randbytes(16)
        k2 = rng.randbytes(16)
        if k1 != k2:
            assert hmac_sha1(k1, message) != hmac_sha1(k2, message)


def test_instrumented_digests_match_plain():
    rng = random.Random(23)
    for _ in range(50):
        m = rng.randbytes(rng.randrange(0, 200))
        k = rng.randbytes(rng.randrange(1, 70))
        assert sha1(m, OpCount()) == sha1(m)
        assert hmac_sha1(k, m, OpCount()) == hmac_sha1(k, m)


def test_message_too_long_rejected():
    class HugeBytes(bytes):
        def __len__(self):
            return 1 << 62

    with pytest.raises(MessageTooLongError):
        sha1(HugeBytes(b""))


def test_empty_key_rejected():
    with pytest.raises(EmptyKeyError):
        hmac_sha1(b"", b"message")
