"""Counter-based uniform random source with per-path streams.

The generator is the SplitMix64 finalizer applied to a golden-ratio
counter sequence ("splitmix64-counter"). Stream ``i`` under seed ``s``
produces

    u_t = finalize(base(s, i) + (t + 1) * GAMMA),   t = 0, 1, 2, ...

so any draw is addressable in O(1) by its counter: streams can be split,
skipped and evaluated out of order, and path ``i``'s sequence depends on
``(seed, i)`` only. Three equivalent implementations live here and in the
numba kernel (scalar Python, vectorized numpy, jitted scalar); the test
suite checks they agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GENERATOR_NAME = "splitmix64-counter"

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB
#: 2**-53; converts the top 53 bits (plus one) to a uniform in (0, 1].
U53 = 1.1102230246251565e-16


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MULT1) & MASK64
    z = ((z ^ (z >> 27)) * _MULT2) & MASK64
    return z ^ (z >> 31)


def stream_base(seed: int, stream_index: int) -> int:
    """64-bit base of stream ``stream_index`` under ``seed``."""
    return mix64((mix64(seed & MASK64) + ((stream_index + 1) * GAMMA)) & MASK64)


def bits_to_unit(bits: int) -> float:
    """Map 64 random bits to a double in (0, 1] (never 0, log-safe)."""
    return ((bits >> 11) + 1) * U53


def uniform_at(seed: int, stream_index: int, counter: int) -> float:
    """Random-access draw: counter-th uniform of the given stream."""
    base = stream_base(seed, stream_index)
    return bits_to_unit(mix64((base + (counter + 1) * GAMMA) & MASK64))


@dataclass
class RngStream:
    """Sequential view of one keyed stream.

    The stream's randomness is fully determined by ``(seed, stream_index)``;
    ``counter`` only tracks how much has been consumed, and may be set
    directly to jump ahead.
    """

    seed: int
    stream_index: int = 0
    counter: int = 0
    generator: str = GENERATOR_NAME
    _base: int = field(init=False, repr=False)

    def __post_init__(self):
        self._base = stream_base(self.seed, self.stream_index)

    def next_uniform(self) -> float:
        u = bits_to_unit(mix64((self._base + (self.counter + 1) * GAMMA) & MASK64))
        self.counter += 1
        return u

    def next_exponential(self, mean: float) -> float:
        return -mean * np.log(self.next_uniform())

    def spawn(self, stream_index: int) -> "RngStream":
        """Fresh stream under the same seed."""
        return RngStream(self.seed, stream_index)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MULT1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MULT2)
    z ^= z >> np.uint64(31)
    return z


def uniform_block(seed: int, stream_index: int, counter0: int, n: int) -> np.ndarray:
    """Vectorized draw of uniforms ``counter0 .. counter0+n-1`` of one stream."""
    base = np.uint64(stream_base(seed, stream_index))
    ctr = np.arange(counter0 + 1, counter0 + n + 1, dtype=np.uint64)
    bits = _mix64_vec(base + ctr * np.uint64(GAMMA))
    return ((bits >> np.uint64(11)).astype(np.float64) + 1.0) * U53


def uniform_matrix(seed: int, n_streams: int, counter0: int, n: int) -> np.ndarray:
    """Vectorized ``(n_streams, n)`` block: row ``i`` is stream ``i``."""
    idx = np.arange(1, n_streams + 1, dtype=np.uint64)
    seed_mixed = np.uint64(mix64(seed & MASK64))
    bases = _mix64_vec(seed_mixed + idx * np.uint64(GAMMA))
    ctr = np.arange(counter0 + 1, counter0 + n + 1, dtype=np.uint64)
    bits = _mix64_vec(bases[:, None] + ctr[None, :] * np.uint64(GAMMA))
    return ((bits >> np.uint64(11)).astype(np.float64) + 1.0) * U53
