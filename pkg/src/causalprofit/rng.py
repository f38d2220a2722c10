"""Deterministic random streams from a single 64-bit seed.

Every random draw in this package flows through the splitmix-style
generator below: a 64-bit counter advanced by a fixed odd constant whose
outputs are whitened by three xorshift-multiply rounds. The k-th output
is a pure function of ``seed + k * GOLDEN``, which makes blocks of draws
vectorizable and guarantees identical streams for identical seeds on any
platform.

Child streams are derived from the parent's construction seed and a tag,
never from how much the parent has already drawn, so the set of streams
an algorithm uses is a function of its inputs alone. The derivation is
``mix(seed XOR mix(tag))`` with string tags hashed by 64-bit FNV-1a.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["SplitMix64"]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

# 2**-53, the spacing of the uniform grid built from the top 53 bits.
_UNIFORM_SCALE = float.fromhex("0x1p-53")


def _mix(value: int) -> int:
    value &= _MASK
    value = ((value ^ (value >> 30)) * _MIX_1) & _MASK
    value = ((value ^ (value >> 27)) * _MIX_2) & _MASK
    return value ^ (value >> 31)


def _mix_array(values: np.ndarray) -> np.ndarray:
    values = values ^ (values >> np.uint64(30))
    values = values * np.uint64(_MIX_1)
    values = values ^ (values >> np.uint64(27))
    values = values * np.uint64(_MIX_2)
    return values ^ (values >> np.uint64(31))


def _tag_to_u64(tag) -> int:
    if isinstance(tag, int):
        return tag & _MASK
    if isinstance(tag, str):
        digest = _FNV_OFFSET
        for byte in tag.encode("utf-8"):
            digest = ((digest ^ byte) * _FNV_PRIME) & _MASK
        return digest
    raise TypeError(f"stream tag must be an int or str, got {type(tag).__name__}")


class SplitMix64:
    """Seeded stream of 64-bit words, uniforms, normals, and shuffles."""

    def __init__(self, seed: int):
        if not isinstance(seed, int):
            raise TypeError(f"seed must be an int, got {type(seed).__name__}")
        self._seed = seed & _MASK
        self._counter = 0

    @property
    def seed(self) -> int:
        return self._seed

    def spawn(self, tag) -> "SplitMix64":
        """Independent child stream identified by (construction seed, tag)."""
        return SplitMix64(_mix(self._seed ^ _mix(_tag_to_u64(tag))))

    def next_u64(self) -> int:
        self._counter += 1
        return _mix((self._seed + self._counter * _GOLDEN) & _MASK)

    def _block(self, count: int) -> np.ndarray:
        if count < 0:
            raise ValueError(f"count must be nonnegative, got {count}")
        indices = np.arange(self._counter + 1, self._counter + count + 1, dtype=np.uint64)
        self._counter += count
        states = np.uint64(self._seed) + indices * np.uint64(_GOLDEN)
        return _mix_array(states)

    def uniforms(self, count: int) -> np.ndarray:
        """Doubles on [0, 1) from the top 53 bits of each word."""
        return (self._block(count) >> np.uint64(11)).astype(np.float64) * _UNIFORM_SCALE

    def normals(self, count: int) -> np.ndarray:
        """Standard normals via the Box-Muller transform on word pairs."""
        pairs = (count + 1) // 2
        # Shift into (0, 1] so the log never sees zero.
        u1 = ((self._block(pairs) >> np.uint64(11)).astype(np.float64) + 1.0) * _UNIFORM_SCALE
        u2 = (self._block(pairs) >> np.uint64(11)).astype(np.float64) * _UNIFORM_SCALE
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = (2.0 * math.pi) * u2
        draws = np.empty(2 * pairs, dtype=np.float64)
        draws[0::2] = radius * np.cos(angle)
        draws[1::2] = radius * np.sin(angle)
        return draws[:count]

    def bernoulli(self, probability: float, count: int) -> np.ndarray:
        """Array of 0/1 int64 draws with the given success probability."""
        if math.isnan(probability) or not 0.0 <= probability <= 1.0:
            raise ValueError(f"probability must lie in [0, 1], got {probability!r}")
        return (self.uniforms(count) < probability).astype(np.int64)

    def permutation(self, count: int) -> np.ndarray:
        """Fisher-Yates shuffle of 0..count-1 driven by uniform draws."""
        order = np.arange(count, dtype=np.int64)
        if count < 2:
            return order
        picks = self.uniforms(count - 1)
        for position in range(count - 1, 0, -1):
            other = int(picks[count - 1 - position] * (position + 1))
            order[position], order[other] = order[other], order[position]
        return order
