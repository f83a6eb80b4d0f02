"""Deterministic random numbers on the SplitMix64 stream.

Every stochastic step in this package (corpus synthesis, augmentation, weight
init, dropout masks, shuffles) draws from this generator rather than Python's
or numpy's global RNG, so a seed pins the produced bytes exactly, and the
stream is reproducible from the published SplitMix64 algorithm alone.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
# 53-bit mantissa scale: uniform doubles are (u64 >> 11) * 2**-53 in [0, 1).
_INV_2_53 = 2.0**-53


def splitmix64_next(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (new_state, 64-bit output)."""
    state = (state + _GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
    z ^= z >> 31
    return state, z


def mix64(base: int, *parts: int) -> int:
    """Derive a child seed from a base seed and integer tags.

    Each tag re-seeds a SplitMix64 stream at (acc XOR tag) and takes its first
    output, so distinct tag tuples give statistically independent children.
    """
    acc = base & _MASK
    for part in parts:
        _, acc = splitmix64_next(acc ^ (part & _MASK))
    return acc


class SplitMix64:
    """SplitMix64 stream with uniform/normal draws.

    Normal variates use the Box-Muller transform with both outputs consumed in
    order, so the mapping from seed to noise stream is fixed. The vectorized
    draws (`uniforms`, `normals`) produce exactly the same values as repeated
    scalar calls.
    """

    __slots__ = ("_state", "_spare")

    def __init__(self, seed: int):
        self._state = seed & _MASK
        self._spare: float | None = None

    @property
    def state(self) -> int:
        return self._state

    def next_u64(self) -> int:
        self._state, out = splitmix64_next(self._state)
        return out

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniforms(self, n: int) -> np.ndarray:
        """n uniform doubles in [0, 1), identical to n `uniform()` calls."""
        if n <= 0:
            return np.empty(0, dtype=np.float64)
        steps = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(self._state) + steps * np.uint64(_GOLDEN)
        self._state = int(z[-1])
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_A)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_B)
        z ^= z >> np.uint64(31)
        return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def normal(self) -> float:
        """Standard normal variate (Box-Muller, spare value cached)."""
        if self._spare is not None:
            out, self._spare = self._spare, None
            return out
        u1 = max(self.uniform(), _INV_2_53)  # keep log(u1) finite
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def normals(self, n: int) -> np.ndarray:
        """n standard normal variates, identical to n `normal()` calls."""
        if n <= 0:
            return np.empty(0, dtype=np.float64)
        out = np.empty(n, dtype=np.float64)
        start = 0
        if self._spare is not None:
            out[0], self._spare = self._spare, None
            start = 1
        pairs = (n - start + 1) // 2
        if pairs:
            u = self.uniforms(2 * pairs)
            u1 = np.maximum(u[0::2], _INV_2_53)
            u2 = u[1::2]
            r = np.sqrt(-2.0 * np.log(u1))
            angle = (2.0 * np.pi) * u2
            inter = np.empty(2 * pairs, dtype=np.float64)
            inter[0::2] = r * np.cos(angle)
            inter[1::2] = r * np.sin(angle)
            take = n - start
            out[start:] = inter[:take]
            if take < 2 * pairs:
                self._spare = float(inter[-1])
        return out

    def below(self, n: int) -> int:
        """Integer uniform in [0, n)."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        return self.next_u64() % n

    def shuffled(self, items: list) -> list:
        """Fisher-Yates shuffle of a copy of `items`."""
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out
