"""Seedable, portable random streams.

Everything random in this package draws from ``numpy.random.Philox``, a
counter-based generator whose output is identical across platforms and
whose counter can be moved to any position in O(1).  Streams are keyed by
``(seed, domain)`` so that, e.g., layout sampling and alarm generation
never share draws even when given the same user seed.

Alarm-style simulations additionally split the stream per round: round
``t`` of a simulation that consumes ``draws`` uniforms per round reads the
counter blocks ``[t*B, (t+1)*B)`` with ``B = ceil(draws / 4)`` (Philox
emits 4 doubles per counter increment).  Chunked vectorized evaluation and
one-round-at-a-time evaluation therefore produce bit-identical numbers.
"""

import numpy as np

_MASK64 = (1 << 64) - 1

DOMAIN_LAYOUT = 0
DOMAIN_ALARMS = 1
DOMAIN_SEEDING = 2
DOMAIN_EVAL = 3

# Philox emits 4 float64 draws per counter increment; advance() moves the
# counter, so per-round offsets must be whole blocks.
DRAWS_PER_BLOCK = 4


def blocks_per_round(draws: int) -> int:
    return -(-draws // DRAWS_PER_BLOCK)


def bit_generator(seed: int, domain: int, block_offset: int = 0) -> np.random.Philox:
    bg = np.random.Philox(key=[int(seed) & _MASK64, int(domain) & _MASK64])
    if block_offset:
        bg = bg.advance(block_offset)
    return bg


def generator(seed: int, domain: int, block_offset: int = 0) -> np.random.Generator:
    return np.random.Generator(bit_generator(seed, domain, block_offset))
