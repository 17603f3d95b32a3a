"""Per-trial seed derivation.

Trial ``i`` of a batch with master seed ``m`` is seeded with::

    z = (m + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    seed = z ^ (z >> 31)

i.e. the SplitMix64 finalizer applied to the (i+1)-th element of the
Weyl sequence started at ``m``. ``m`` is reduced modulo 2**64 first, so
negative master seeds are accepted.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64_mix(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    if index < 0:
        raise ValueError("trial index must be non-negative")
    return splitmix64_mix((master_seed & MASK64) + (index + 1) * GOLDEN_GAMMA)
