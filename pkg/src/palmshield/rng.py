"""Deterministic seeded Gaussian streams for projection banks.

Template reproducibility requires that the random projection entries are a
pure function of (seed, hash index, column index, component index), identical
across runs, platforms and implementations.  numpy's own generators do not
promise a frozen bit stream across versions, so the generator used on the
template path is pinned here, end to end:

* counter generator: splitmix64.  The stream keyed by ``key`` produces the
  64-bit words ``avalanche(key + (t + 1) * GAMMA)`` for t = 0, 1, 2, ...
* key derivation: ``stream_key(seed, i, j)`` chains the same avalanche over
  the seed and the two indices (see below).
* uniform mapping: the top 53 bits of each word; even-position words map to
  (0, 1] (safe for log), odd-position words to [0, 1).
* Gaussian mapping: Box-Muller on consecutive word pairs,
  z0 = sqrt(-2 ln u1) * cos(2 pi u2),  z1 = the sin twin,
  consumed in that order.

All constants below are part of the format and must not change.
"""

from __future__ import annotations

import numpy as np

MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_I = np.uint64(0xBF58476D1CE4E5B9)
MIX_J = np.uint64(0x94D049BB133111EB)

_TWO53 = 2.0 ** -53


def avalanche(z):
    """splitmix64 finalizer over uint64 scalars or arrays (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * MIX_I
        z = (z ^ (z >> np.uint64(27))) * MIX_J
        return z ^ (z >> np.uint64(31))


def stream_key(seed: int, i: int | np.ndarray, j: int | np.ndarray) -> np.ndarray:
    """64-bit stream key for hash i, column j under a template seed.

    key = A(A(A(seed + GAMMA) ^ i*MIX_I) ^ j*MIX_J), A = avalanche, all mod 2^64.
    """
    with np.errstate(over="ignore"):
        h = avalanche(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + GAMMA)
        h = avalanche(h ^ (np.asarray(i, dtype=np.uint64) * MIX_I))
        h = avalanche(h ^ (np.asarray(j, dtype=np.uint64) * MIX_J))
    return h


def raw_words(keys: np.ndarray, count: int) -> np.ndarray:
    """Words 0..count-1 of the splitmix64 streams for each key; shape (len(keys), count)."""
    keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
    t = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return avalanche(keys[:, None] + t[None, :] * GAMMA)


def gaussians(keys: np.ndarray, count: int) -> np.ndarray:
    """Standard normal entries per key, Box-Muller over the keyed word stream.

    Returns shape (len(keys), count), float64.  Entry order is the component
    order of the stream; an odd count discards the trailing sin twin.
    """
    keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
    nwords = count + (count & 1)
    words = raw_words(keys, nwords)
    u1 = ((words[:, 0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO53
    u2 = (words[:, 1::2] >> np.uint64(11)).astype(np.float64) * _TWO53
    r = np.sqrt(-2.0 * np.log(u1))
    phi = (2.0 * np.pi) * u2
    out = np.empty((keys.shape[0], nwords), dtype=np.float64)
    out[:, 0::2] = r * np.cos(phi)
    out[:, 1::2] = r * np.sin(phi)
    return out[:, :count]


def derive_seed(master: int, *parts: int) -> int:
    """Fold integer tags into a master seed; used for fixture and protocol RNGs.

    Not part of the template format: fixture randomness may use numpy
    generators keyed by the result.
    """
    h = avalanche(np.uint64(master & 0xFFFFFFFFFFFFFFFF) + GAMMA)
    with np.errstate(over="ignore"):
        for p in parts:
            h = avalanche(h ^ (np.uint64(p & 0xFFFFFFFFFFFFFFFF) * MIX_I))
    return int(h)
