"""Deterministic seed derivation for independent random streams.

Every random stream in the package is a pure function of (master seed,
stream index).  The derivation is a keyed BLAKE2b hash, pinned here so that
results are bit-reproducible across versions and platforms:

    seed = little-endian uint64 of blake2b(key=b"quenchsim-stream-v1",
                                           digest_size=8,
                                           data=pack("<QQ", master mod 2^64, index))

The master seed is reduced to its 64-bit two's-complement representation,
so any Python integer is accepted and derived seeds can themselves act as
masters.  Changing the key or the packing breaks every recorded result, so
neither may change without a version bump in the key string.
"""

from __future__ import annotations

import struct
from hashlib import blake2b

_KEY = b"quenchsim-stream-v1"


def derive_seed(master: int, index: int) -> int:
    """Derive the uint64 seed of stream `index` from `master`.

    Injective for all practical purposes (64-bit keyed hash); distinct
    (master, index) pairs give independent streams.
    """
    if index < 0:
        raise ValueError("stream index must be non-negative")
    h = blake2b(digest_size=8, key=_KEY)
    h.update(struct.pack("<QQ", master & 0xFFFFFFFFFFFFFFFF, index))
    return int.from_bytes(h.digest(), "little")
