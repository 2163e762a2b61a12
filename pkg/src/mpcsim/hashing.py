"""Keyed 64-bit mixing, seed derivation, and the per-variable hash family.

The hash family stands in for the strongly universal families assumed by the
load analysis: one independently seeded mixer per variable, reduced to the
variable's share range by multiply-high.  Everything is deterministic given
the master seed, including the numpy vectorized paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

_MASK = (1 << 64) - 1


def mix64(x: int) -> int:
    """splitmix64 finalizer."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = (z + np.uint64(0x9E3779B97F4A7C15)).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def derive_seed(*parts) -> int:
    """Fold ints and strings into one 64-bit seed, stably across processes."""
    acc = 0x8C9A_11B5_37F1_D3E7
    for part in parts:
        if isinstance(part, str):
            h = 0xCBF29CE484222325
            for b in part.encode():
                h = ((h ^ b) * 0x100000001B3) & _MASK
            part = h
        elif not isinstance(part, int):
            raise TypeError(f"seed parts must be int or str, got {type(part)}")
        acc = mix64(acc ^ mix64(part & _MASK))
    return acc


def _reduce_mulhi(h: np.ndarray, p: int) -> np.ndarray:
    """floor(h * p / 2^64) elementwise for uint64 h and p < 2^31."""
    pp = np.uint64(p)
    hi = h >> np.uint64(32)
    lo = h & np.uint64(0xFFFFFFFF)
    return (hi * pp + ((lo * pp) >> np.uint64(32))) >> np.uint64(32)


@dataclass(frozen=True)
class HashFamily:
    """One keyed mixer per variable; h_i maps values into [0, p_i)."""

    master_seed: int
    variables: tuple[str, ...]
    ranges: tuple[int, ...]

    def __post_init__(self):
        if len(self.variables) != len(self.ranges):
            raise ValueError("one range per variable")
        if any(r < 1 or r >= (1 << 31) for r in self.ranges):
            raise ValueError("share ranges must be in [1, 2^31)")

    def seed_for(self, var_index: int) -> int:
        return derive_seed(self.master_seed, "var", var_index)

    def coord(self, var_index: int, value: int) -> int:
        p = self.ranges[var_index]
        if p == 1:
            return 0
        h = mix64(self.seed_for(var_index) ^ mix64(value & _MASK))
        return (h * p) >> 64

    def coords_array(self, var_index: int, values: np.ndarray) -> np.ndarray:
        p = self.ranges[var_index]
        if p == 1:
            return np.zeros(len(values), dtype=np.int64)
        seed = np.uint64(self.seed_for(var_index))
        h = _mix64_vec(seed ^ _mix64_vec(values.astype(np.uint64)))
        return _reduce_mulhi(h, p).astype(np.int64)


def digest_rows(arr: np.ndarray, salt: int = 0x51_7CC1B7_2722_0A95) -> tuple[int, int]:
    """(xor, sum mod 2^64) of a keyed hash of each row of an int array."""
    if arr.size == 0:
        return 0, 0
    acc = np.full(arr.shape[0], np.uint64(salt))
    for c in range(arr.shape[1]):
        acc = _mix64_vec(acc ^ _mix64_vec(arr[:, c].astype(np.uint64)))
    x = int(np.bitwise_xor.reduce(acc))
    s = int(np.add.reduce(acc, dtype=np.uint64))
    return x, s
