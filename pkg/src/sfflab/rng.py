"""Reproducible randomness plumbing.

A counter-based Philox generator is keyed per (master seed, experiment tag,
sample index), so every sample owns an independent substream whose identity
does not depend on how work is split across processes.  Gaussians come from
the rejection-free (cos/sin) Box-Muller transform so draws are reproducible
bit-for-bit across platforms, independent of any ziggurat table.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _key_part(part) -> int:
    if isinstance(part, str):
        digest = hashlib.blake2b(part.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    if isinstance(part, (int, np.integer)):
        return int(part) & _MASK64
    raise TypeError(f"substream key parts must be str or int, got {type(part)!r}")


def substream(seed: int, *key) -> np.random.Generator:
    """Independent generator for (seed, key); identical inputs, identical stream."""
    spawn = tuple(_key_part(p) for p in key)
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=spawn)
    return np.random.Generator(np.random.Philox(key=ss.generate_state(2, np.uint64)))


def standard_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    """n standard normals via polar-form Box-Muller (rejection-free variant)."""
    m = (n + 1) // 2
    u1 = rng.random(m)
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log1p(-u1))  # 1 - u1 in (0, 1], no log(0)
    ang = 2.0 * np.pi * u2
    z = np.empty(2 * m)
    z[0::2] = r * np.cos(ang)
    z[1::2] = r * np.sin(ang)
    return z[:n]
