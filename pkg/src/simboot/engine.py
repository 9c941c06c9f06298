"""Multiplier bootstrap for many local models at once.

1. Draw B multiplier vectors; each one reweights *all* K likelihoods, which
   keeps the dependence between models intact.
2. Estimate each model's quantile function of the square-root bootstrap LR.
3. Find the largest marginal level c whose critical values keep the
   probability of *any* exceedance at or below alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels as _kernels
from .errors import (
    InvalidAlpha,
    NegativeMultiplier,
    TooManyRejections,
)
from .linalg import PIVOT_RTOL
from .models import EPS_W, Family, GridDesign
from .rng import WeightScheme, draw_weights

MAX_REDRAWS = 100
_FLOOR_SLACK = 1e-9


def level_count(alpha, total):
    """``floor(alpha * total)``, robust to the representation error of alpha."""
    return int(math.floor(alpha * total + _FLOOR_SLACK))


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha}")


@dataclass
class LrMatrix:
    """K x B square-root likelihood-ratio statistics, one column per replicate."""

    s: np.ndarray
    sorted_columns: np.ndarray = field(init=False)
    rejected_replicates: int = 0

    def __post_init__(self):
        self.s = np.ascontiguousarray(self.s, dtype=np.float64)
        if self.s.ndim != 2 or self.s.shape[1] < 1:
            raise ValueError("LR matrix must be K x B with B >= 1")
        if not np.all(np.isfinite(self.s)) or np.any(self.s < 0):
            raise ValueError("LR statistics must be finite and nonnegative")
        self.sorted_columns = np.sort(self.s, axis=1)

    @property
    def K(self):
        return self.s.shape[0]

    @property
    def B(self):
        return self.s.shape[1]

    def critical_values_at(self, j):
        """Critical values for marginal level ``j / B``: order statistic ``s_(B-j)``."""
        return self.sorted_columns[:, self.B - j - 1].copy()


@dataclass(frozen=True)
class CorrectionResult:
    level: float
    count: int
    critical_values: np.ndarray
    union_frequency: float
    alpha: float
    conservative_floor: bool = False

    @property
    def corrected_confidence(self):
        return 1.0 - self.level


def marginal_quantile(sorted_column, alpha):
    """``inf{z >= 0 : #{s_b > z} / B <= alpha}`` for an ascending sample."""
    _check_alpha(alpha)
    col = np.asarray(sorted_column, dtype=np.float64)
    b = col.size
    if b < 1:
        raise ValueError("need at least one replicate")
    return float(col[b - level_count(alpha, b) - 1])


def critical_values(lr, level):
    """Marginal ``(1 - level)`` critical values of every model."""
    _check_alpha(level)
    j = level_count(level, lr.B)
    return lr.critical_values_at(j)


def union_exceedance(lr, critical_values):
    z = np.asarray(critical_values, dtype=np.float64)
    if z.shape != (lr.K,):
        raise ValueError(f"need {lr.K} critical values, got shape {z.shape}")
    return _kernels.union_count(lr.s, z) / lr.B


def multiplicity_correction(lr, alpha):
    """Largest grid level ``c = j / B <= alpha`` whose simultaneous exceedance is ``<= alpha``.

    The union frequency is nondecreasing in ``j``, so a binary search over
    ``j = 1 .. floor(alpha B)`` finds the answer.
    """
    _check_alpha(alpha)
    nb = lr.B
    jmax = level_count(alpha, nb)
    if jmax < 1:
        raise InvalidAlpha(f"alpha * B must be >= 1 (alpha={alpha}, B={nb})")

    def count(j):
        return _kernels.union_count(lr.s, lr.critical_values_at(j))

    c1 = count(1)
    if c1 > jmax:
        return CorrectionResult(1 / nb, 1, lr.critical_values_at(1), c1 / nb, alpha, True)
    lo, hi = 1, jmax
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if count(mid) <= jmax:
            lo = mid
        else:
            hi = mid - 1
    return CorrectionResult(lo / nb, lo, lr.critical_values_at(lo), count(lo) / nb, alpha)


def _check_scheme(grid, scheme):
    scheme = WeightScheme(scheme)
    if grid.family is Family.QT and not scheme.nonnegative:
        raise NegativeMultiplier(
            f"the quantile family needs a nonnegative multiplier law, not {scheme.value!r}"
        )
    return scheme


class _Replicates:
    """Computes columns of squared bootstrap LR statistics for one dataset."""

    def __init__(self, design, y):
        self.design = design
        self.fam = design.family
        self.theta = design.fit(y)
        if self.fam is Family.QT:
            self.order = np.argsort(y, kind="stable")
            self.ys = y[self.order]
            self.split = np.searchsorted(self.ys, self.theta, side="left")
            return
        r = design.residuals(y, self.theta)
        if self.fam is Family.LC:
            self.rows = np.vstack([design.W, design.W * r])
        else:
            wr = design.W * r
            self.rows = np.vstack([design.moment_rows, wr, wr * design.t, wr * design.t**2])

    def __call__(self, u):
        """``u`` is (n, m); returns squared statistics (K, m) and a per-column ok mask."""
        d = self.design
        if self.fam is Family.QT:
            s2, ok = _kernels.qt_lr_batch(
                self.ys, np.ascontiguousarray(u[self.order].T), d.taus, self.theta, self.split
            )
            return s2, ok
        prod = self.rows @ u
        K = d.K
        if self.fam is Family.LC:
            curv, score = prod[:K], prod[K:]
            good = curv > EPS_W * d.sw[:, None]
            s2 = np.where(good, score * score / np.where(good, curv, 1.0), 0.0)
            return s2, good.all(axis=0)
        m = prod.reshape(8, K, -1)
        q, good = _kernels.sym3_quadform(m[0], m[1], m[2], m[2], m[3], m[4], m[5], m[6], m[7], PIVOT_RTOL)
        return q, good.all(axis=0)


def build_lr_matrix(data, grid, B, scheme, rng, *, design=None, draw=None):
    """K x B matrix of ``sqrt(2 (L_b(theta_b) - L_b(theta_hat)))``.

    Replicate ``b`` uses substream ``b`` of ``rng``. A replicate whose weighted
    curvature is not positive definite for some model is redrawn from the
    substreams ``B, B+1, ...`` in replicate order; at most ``MAX_REDRAWS``
    attempts per replicate. ``draw(n, index)`` overrides the multiplier law
    (testing hook).
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    if draw is None:
        scheme = _check_scheme(grid, scheme)

        def draw(n, index):
            return draw_weights(scheme, n, rng, index)

    design = design if design is not None else GridDesign(grid, data.x)
    design.check(data)
    reps = _Replicates(design, data.y)
    n = data.n
    u = np.empty((n, B))
    for b in range(B):
        u[:, b] = draw(n, b)
    s2, ok = reps(u)

    rejected = 0
    next_index = B
    for b in np.flatnonzero(~ok):
        for _ in range(MAX_REDRAWS):
            col = np.asarray(draw(n, next_index), dtype=np.float64)[:, None]
            next_index += 1
            rejected += 1
            s2_b, ok_b = reps(col)
            if ok_b[0]:
                s2[:, b] = s2_b[:, 0]
                break
        else:
            raise TooManyRejections(
                f"replicate {b} failed the curvature guard {MAX_REDRAWS} times"
            )
    return LrMatrix(np.sqrt(np.maximum(s2, 0.0)), rejected_replicates=rejected)


@dataclass(frozen=True)
class Band:
    """Simultaneous band: one interval per model for its fitted value."""

    locations: np.ndarray
    estimate: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    critical_values: np.ndarray
    correction: CorrectionResult
    rejected_replicates: int = 0

    @property
    def halfwidth(self):
        return 0.5 * (self.upper - self.lower)


def check_loss_interval(ys_sorted, tau, theta_hat, level):
    """Endpoints of ``{t : loss(t) - loss(theta_hat) <= level}`` for the unit-weight check loss."""
    ys = np.asarray(ys_sorted, dtype=np.float64)
    n = ys.size
    knots = ys
    # loss at each knot via prefix sums: loss(t) = sum rho_tau(y - t)
    cum = np.concatenate([[0.0], np.cumsum(ys)])
    below = np.searchsorted(ys, knots, side="left")
    loss = (1 - tau) * (below * knots - cum[below]) + tau * ((cum[-1] - cum[below]) - (n - below) * knots)
    base = float(np.sum((ys - theta_hat) * (tau - (ys < theta_hat))))
    excess = loss - base

    def walk(idx_range, slope_out, sign):
        prev_t, prev_e = theta_hat, 0.0
        for i in idx_range:
            t, e = knots[i], excess[i]
            if (t - theta_hat) * sign <= 0:
                continue
            if e > level:
                return prev_t + (t - prev_t) * (level - prev_e) / (e - prev_e)
            prev_t, prev_e = t, e
        return prev_t + sign * (level - prev_e) / slope_out

    upper = walk(range(n), (1 - tau) * n, 1.0)
    lower = walk(range(n - 1, -1, -1), tau * n, -1.0)
    return lower, upper


def simultaneous_band(data, grid, alpha, B, scheme, rng, *, design=None, draw=None):
    design = design if design is not None else GridDesign(grid, data.x)
    lr = build_lr_matrix(data, grid, B, scheme, rng, design=design, draw=draw)
    corr = multiplicity_correction(lr, alpha)
    z = corr.critical_values
    theta = design.fit(data.y)
    if grid.family is Family.QT:
        ys = np.sort(data.y)
        bounds = np.array(
            [check_loss_interval(ys, t, th, 0.5 * zk * zk) for t, th, zk in zip(grid.taus, theta, z)]
        )
        lower, upper, est = bounds[:, 0], bounds[:, 1], theta
    else:
        est = design.fitted_value(theta)
        half = z * design.band_scale()
        lower, upper = est - half, est + half
    return Band(grid.locations, est, lower, upper, z, corr, lr.rejected_replicates)
