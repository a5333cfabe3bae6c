"""Deterministic seed derivation for task grids.

Every stochastic ingredient of a run (disorder draws, drive-parameter
draws, measurement shots, trajectory noise) is seeded from a single root
seed plus the coordinates of the task that consumes it.  The derivation is
a SHA-256 hash over a canonical byte encoding, so it is collision
resistant, independent of Python's randomized ``hash()``, and stable
across interpreter versions and platforms.

Encoding: the 64-bit little-endian root, then for each path component a
tag byte (``b"i"`` for integers, ``b"s"`` for strings) followed by the
value (integers as 64-bit little-endian two's complement, strings as
UTF-8 prefixed with their 64-bit length).  The first 8 bytes of the
digest, read little-endian, are the derived seed.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(root: int, *path: int | str) -> int:
    """Derive a 64-bit seed from a root seed and task coordinates.

    Distinct ``(root, path)`` pairs map to distinct seeds up to SHA-256
    collisions.  The same inputs always produce the same output.
    """
    h = hashlib.sha256()
    h.update((int(root) & _MASK64).to_bytes(8, "little"))
    for part in path:
        if isinstance(part, (int, np.integer)):
            h.update(b"i")
            h.update((int(part) & _MASK64).to_bytes(8, "little"))
        elif isinstance(part, str):
            data = part.encode("utf-8")
            h.update(b"s")
            h.update(len(data).to_bytes(8, "little"))
            h.update(data)
        else:
            raise TypeError(f"seed path components must be int or str, got {type(part)!r}")
    return int.from_bytes(h.digest()[:8], "little")


def rng_from(root: int, *path: int | str) -> np.random.Generator:
    """PCG64 generator seeded from :func:`derive_seed`."""
    return np.random.Generator(np.random.PCG64(derive_seed(root, *path)))
