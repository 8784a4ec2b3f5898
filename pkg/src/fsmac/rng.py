"""Deterministic random streams.

All randomness in the package flows through Philox, a counter-based 64-bit
generator, so that independent work items (simulation trials, optimizer
restarts) can each own a private stream derived from (seed, item, role).
Streams are independent of scheduling: results merged by item index are
bit-identical no matter how many threads ran the items.

Key layout: word0 = seed, word1 = (item << 8) | role. Items are therefore
limited to 56 bits, which is far beyond any guard in this package.
"""

import numpy as np

MASK64 = (1 << 64) - 1

ROLE_CODEBOOKS = 0
ROLE_TRIAL = 1
ROLE_RESTART = 2
ROLE_ENCODER = 3


def stream(seed: int, item: int = 0, role: int = 0) -> np.random.Generator:
    """Return the Generator for one (seed, item, role) work item."""
    if not 0 <= role < 256:
        raise ValueError(f"role must be in [0, 256), got {role}")
    if item < 0:
        raise ValueError(f"item must be nonnegative, got {item}")
    key = [seed & MASK64, ((item << 8) | role) & MASK64]
    return np.random.Generator(np.random.Philox(key=key))
