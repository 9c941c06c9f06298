"""Synthetic data-generating process: mean curve, design, noise level."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def bump_mean(x):
    """Flat level 5 with an upward bump centred at 0.35 and a dip at 0.55."""
    x = np.asarray(x, dtype=np.float64)
    out = np.full(x.shape, 5.0)
    up = (x >= 0.25) & (x <= 0.45)
    down = (x > 0.45) & (x <= 0.65)
    out[up] = 5.0 + 3.8 * (1.0 - 100.0 * (x[up] - 0.35) ** 2)
    out[down] = 5.0 - 3.8 * (1.0 - 100.0 * (x[down] - 0.55) ** 2)
    return out


def flat_mean(level=5.0):
    def f(x):
        return np.full(np.shape(x), float(level))

    f.level = float(level)
    return f


def table_mean(xs, fs):
    """Piecewise-linear mean curve through the points ``(xs, fs)``."""
    xs = np.asarray(xs, dtype=np.float64)
    fs = np.asarray(fs, dtype=np.float64)
    order = np.argsort(xs)
    xs, fs = xs[order], fs[order]
    if len(xs) < 2 or not np.all(np.isfinite(xs)) or not np.all(np.isfinite(fs)):
        raise ValueError("mean table needs at least two finite points")

    def f(x):
        return np.interp(np.asarray(x, dtype=np.float64), xs, fs)

    if np.all(fs == fs[0]):
        f.level = float(fs[0])
    return f


def equidistant_design(n):
    """``X_i = (i-1)/(n-1)``, endpoints included."""
    return np.linspace(0.0, 1.0, n)


@dataclass(frozen=True)
class DgpSpec:
    """``Y_i = f(X_i) + noise_sd * N(0, 1)`` on an equidistant grid of [0, 1].

    ``f`` must accept an array. Constant mean functions carry a ``level``
    attribute, which the quantile family needs to know its targets.
    """

    n: int = 400
    f: Callable = field(default=bump_mean)
    noise_sd: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if not (self.noise_sd > 0 and np.isfinite(self.noise_sd)):
            raise ValueError(f"noise_sd must be positive, got {self.noise_sd}")
        fx = self.mean()
        if not np.all(np.isfinite(fx)):
            raise ValueError("mean function is not finite on the design")

    @property
    def x(self):
        return equidistant_design(self.n)

    def mean(self):
        return np.asarray(self.f(self.x), dtype=np.float64)

    @property
    def constant_level(self):
        """Level of a constant mean function, or ``None``."""
        return getattr(self.f, "level", None)

    def noiseless(self):
        """Copy with zero noise; only meant for tests and sanity runs."""
        clone = object.__new__(DgpSpec)
        object.__setattr__(clone, "n", self.n)
        object.__setattr__(clone, "f", self.f)
        object.__setattr__(clone, "noise_sd", 0.0)
        return clone
