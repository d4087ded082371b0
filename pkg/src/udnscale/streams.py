"""Counter-based random substreams.

Every stream is a Philox generator whose 128-bit key is a hash of
(master seed, tag, lambda index, realization index). Results therefore do not
depend on how work is split across processes.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

MASK64 = (1 << 64) - 1


def stream_key(seed: int, tag: str, *indices: int) -> int:
    h = hashlib.blake2b(digest_size=16)
    h.update(struct.pack("<Q", seed & MASK64))
    h.update(tag.encode())
    for i in indices:
        h.update(struct.pack("<q", int(i)))
    return int.from_bytes(h.digest(), "little")


def substream(seed: int, tag: str, *indices: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stream_key(seed, tag, *indices)))
