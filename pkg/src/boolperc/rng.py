"""Counter-based random streams keyed by (master seed, purpose tag, index).

Streams for distinct keys are independent and carry no sequential coupling, so
replicas and cells can be drawn in any order (or in parallel) with identical
results.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream", "tag_entropy"]


def tag_entropy(tag: str) -> int:
    digest = hashlib.blake2b(tag.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=[int(seed) & (2**64 - 1), tag_entropy(tag), int(index)])
    return np.random.Generator(np.random.Philox(ss))
