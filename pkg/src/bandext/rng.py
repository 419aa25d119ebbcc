"""Counter-based SplitMix64 streams.

Output ``k`` (k = 0, 1, ...) of a stream with key ``s`` is
``mix64(s + (k + 1) * GOLDEN)`` modulo 2**64, where ``mix64`` is the
SplitMix64 finalizer (Steele, Lea & Flood, 2014):

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

This is the sequential SplitMix64 generator written so that any block of a
stream can be produced directly, for many streams at once. Uniform doubles
take the top 53 bits: ``(u >> 11) * 2**-53`` in [0, 1).
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TRIAL_SALT = 0xD1B54A32D192ED03


def mix64_int(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64(z):
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_trial_stream(seed: int, trial_id: int) -> "SplitMix64":
    """Stream for one Monte-Carlo trial.

    key = mix64(mix64(seed) ^ mix64(trial_id * SALT + GOLDEN)); both inputs
    pass through the finalizer so nearby seeds and trial ids land far apart.
    """
    a = mix64_int(seed & MASK64)
    b = mix64_int((trial_id * _TRIAL_SALT + GOLDEN) & MASK64)
    return SplitMix64(mix64_int(a ^ b))


def uniform_block(keys, start: int, count: int) -> np.ndarray:
    """Uniform doubles at positions start..start+count-1 of each stream.

    ``keys`` is a 1-D array of stream keys; the result has shape
    ``(len(keys), count)``.
    """
    keys = np.asarray(keys, dtype=np.uint64).reshape(-1, 1)
    # Counter arithmetic is done mod 2**64 in Python ints, then broadcast.
    offs = np.array([((start + k + 1) * GOLDEN) & MASK64 for k in range(count)],
                    dtype=np.uint64)
    with np.errstate(over="ignore"):
        u = mix64(keys + offs[None, :])
    return (u >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def box_muller(u1, u2):
    """Two independent standard normals per uniform pair.

    ``u1`` is mapped to (0, 1] via ``1 - u1`` so the logarithm is finite.
    Returns ``(r cos(theta), r sin(theta))``.
    """
    r = np.sqrt(-2.0 * np.log1p(-u1))
    theta = 2.0 * np.pi * u2
    return r * np.cos(theta), r * np.sin(theta)


class SplitMix64:
    """A single stream with a position counter."""

    def __init__(self, key: int, position: int = 0):
        self.key = key & MASK64
        self.position = position

    def next_u64(self) -> int:
        self.position += 1
        return mix64_int(self.key + self.position * GOLDEN)

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53

    def uniforms(self, count: int) -> np.ndarray:
        out = uniform_block([self.key], self.position, count)[0]
        self.position += count
        return out

    def __eq__(self, other):
        return isinstance(other, SplitMix64) and (self.key, self.position) == (other.key, other.position)

    def __repr__(self):
        return f"SplitMix64(key=0x{self.key:016x}, position={self.position})"
