"""Run the instrumented primitives over a message and report the op tally."""

from __future__ import annotations

from . import costmodel
from .aes import Aes128
from .opcount import OpCount
from .sha1 import hmac_sha1

_FIXED_MAC_KEY = bytes(range(20))
_FIXED_AES_KEY = bytes(range(16))


def instrumented_run(algorithm: str, message_bits: int) -> OpCount:
    """Tally of primitive ops executed by this implementation on a message of the given size.

    The message content is a fixed byte pattern; neither algorithm's op count
    depends on data values.
    """
    if message_bits < 1:
        raise costmodel.MessageSizeError("message must be at least one bit")
    nbytes = -(-message_bits // 8)
    message = bytes(i & 0xFF for i in range(nbytes))
    ops = OpCount()
    if algorithm == costmodel.HMAC_SHA1:
        if message_bits > costmodel.MAX_HMAC_MESSAGE_BITS:
            raise costmodel.MessageSizeError("message exceeds the 2^64-bit SHA-1 limit")
        hmac_sha1(_FIXED_MAC_KEY, message, ops)
    elif algorithm == costmodel.AES128:
        cipher = Aes128(_FIXED_AES_KEY, ops)
        padded = message + b"\x00" * (-len(message) % 16)
        for off in range(0, len(padded), 16):
            cipher.encrypt_block(padded[off : off + 16])
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return ops
