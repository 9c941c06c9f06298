"""Keyed random substreams and bootstrap multiplier laws.

Every random vector in the package comes from its own substream, addressed by
a tuple of integers below a master seed. Results therefore do not depend on
evaluation order or on how work is split across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# top-level stream families
DATA_STREAM = 0
BOOT_STREAM = 1
MC_REP_STREAM = 2
BOOT_REP_DATA_STREAM = 3
BOOT_REP_STREAM = 4


@dataclass(frozen=True)
class RngSpec:
    seed: int = 42
    key: tuple = ()

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an integer in [0, 2**64), got {self.seed}")

    def child(self, *idx):
        return RngSpec(self.seed, self.key + tuple(int(i) for i in idx))

    def generator(self, *idx):
        """Fresh generator for substream ``key + idx``."""
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key + tuple(int(i) for i in idx))
        return np.random.Generator(np.random.PCG64(ss))


class WeightScheme(str, enum.Enum):
    """Multiplier laws; each has mean 1 and variance 1."""

    GAUSS = "gauss"  # N(1, 1)
    EXP = "exp"      # Exp(1)
    BERN = "bern"    # 2 * Bernoulli(1/2)

    @property
    def nonnegative(self):
        return self is not WeightScheme.GAUSS


def draw_weights(scheme, n, rng, replicate):
    """Multiplier vector ``u`` of length ``n`` for bootstrap replicate ``replicate``."""
    scheme = WeightScheme(scheme)
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = rng.generator(replicate)
    if scheme is WeightScheme.GAUSS:
        return 1.0 + gen.standard_normal(n)
    if scheme is WeightScheme.EXP:
        return gen.standard_exponential(n)
    return 2.0 * gen.integers(0, 2, size=n).astype(np.float64)
