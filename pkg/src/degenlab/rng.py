"""Counter-based splittable random numbers.

Every random variate is a pure function of (seed, stream, counter), so a
simulation's noise is fully determined by its seed and the particle index,
independent of execution order.  Chunked or threaded runs therefore produce
byte-identical trajectories.

The generator is the splitmix64 output function applied to
key + counter, with per-stream keys derived from the seed by the same
finalizer.  splitmix64's finalizer is a bijection on 64-bit integers with
good avalanche behavior, which is all a counter-mode generator needs.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = 0x9E3779B97F4A7C15
#: counter offset separating initial-condition draws from path increments
INIT_COUNTER_BASE = 1 << 62

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_NEG53 = 2.0**-53


def _mix(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, vectorized over uint64 arrays."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed: int, streams) -> np.ndarray:
    """One 64-bit key per stream index (typically per particle)."""
    streams = np.asarray(streams, dtype=np.uint64)
    base = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        z = base + np.uint64(_GOLDEN) * (streams + np.uint64(1))
    return _mix(z)


def raw(keys: np.ndarray, counter: int | np.ndarray) -> np.ndarray:
    """Raw 64-bit words for the given (key, counter) positions."""
    c = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = keys + _mix(c)
    return _mix(z)


def uniforms(keys: np.ndarray, counter: int | np.ndarray) -> np.ndarray:
    """U(0,1) variates, strictly inside the open interval."""
    return ((raw(keys, counter) >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_NEG53


def normals(keys: np.ndarray, counter: int | np.ndarray) -> np.ndarray:
    """One N(0,1) per (key, counter) via Box-Muller (cosine branch).

    Two raw words are consumed per normal: counters 2^63 + 2c and
    2^63 + 2c + 1, a half of the counter space reserved for normals so they
    never collide with uniform draws at any logical counter.
    """
    c = np.uint64(1 << 63) + np.asarray(counter, dtype=np.uint64) * np.uint64(2)
    u1 = uniforms(keys, c)
    u2 = uniforms(keys, c + np.uint64(1))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)


class StreamRng:
    """Convenience wrapper binding a seed to a block of particle streams."""

    def __init__(self, seed: int, n_streams: int, stream_offset: int = 0):
        self.seed = int(seed)
        self.keys = stream_keys(seed, np.arange(stream_offset, stream_offset + n_streams))

    def normals_at(self, counter: int) -> np.ndarray:
        return normals(self.keys, counter)

    def uniforms_at(self, counter: int) -> np.ndarray:
        return uniforms(self.keys, counter)

    def init_uniforms(self, slot: int = 0) -> np.ndarray:
        return uniforms(self.keys, INIT_COUNTER_BASE + slot)
