"""Monte-Carlo ground truth on synthetic data with a known mean curve.

The true-world statistic of model k on one dataset is
``sqrt(2 (L_k(theta_hat_k) - L_k(theta*_k)))`` with ``theta*`` the target
under the known mean. Its quantiles across many datasets give the true
multiplicity correction; the coverage experiment checks how often the
bootstrap band built from a single dataset contains every target.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engine import LrMatrix, build_lr_matrix, level_count, multiplicity_correction
from .models import Dataset, Family, GridDesign, check_loss
from .rng import BOOT_STREAM, DATA_STREAM


def sample_dataset(dgp, rng, dataset_index):
    """Responses ``f(X_i) + noise_sd * N(0, 1)`` from substream ``dataset_index``."""
    x = dgp.x
    noise = rng.generator(dataset_index).standard_normal(dgp.n)
    return Dataset(x, dgp.mean() + dgp.noise_sd * noise)


def _quantile_sqrt_lr(ys_sorted_cols, taus, theta_hat, theta_star):
    """Per column: ``sqrt(2 (L(theta_hat) - L(theta*)))`` for the unit-weight check loss."""
    out = np.empty((taus.size, ys_sorted_cols.shape[1]))
    for m in range(ys_sorted_cols.shape[1]):
        y = ys_sorted_cols[:, m]
        th = theta_hat[:, m]
        diff = check_loss(y[None, :] - theta_star[:, None], taus[:, None]) - check_loss(
            y[None, :] - th[:, None], taus[:, None]
        )
        out[:, m] = np.sqrt(np.maximum(2.0 * diff.sum(axis=1), 0.0))
    return out


def true_sqrt_lr(design, y, theta_star_local):
    """True-world statistics for one response vector (K,) or a matrix of columns (K, M)."""
    y = np.asarray(y, dtype=np.float64)
    if design.family is not Family.QT:
        return design.sqrt_lr(y, theta_star_local)
    cols = y[:, None] if y.ndim == 1 else y
    srt = np.sort(cols, axis=0)
    th = design.fit(cols)
    out = _quantile_sqrt_lr(srt, design.taus, th, theta_star_local)
    return out[:, 0] if y.ndim == 1 else out


def true_lr_matrix(dgp, grid, M, rng, *, design=None):
    """K x M true-world statistics over datasets ``0 .. M-1`` of ``rng``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    design = design if design is not None else GridDesign(grid, dgp.x)
    theta_star = design.target_local(dgp)
    y = np.column_stack([sample_dataset(dgp, rng, m).y for m in range(M)])
    return LrMatrix(true_sqrt_lr(design, y, theta_star))


def mc_correction(true_lr, alpha):
    """Same search as the bootstrap correction, on true-world statistics."""
    return multiplicity_correction(true_lr, alpha)


@dataclass(frozen=True)
class CoverageReport:
    alphas: np.ndarray
    M: int
    B: int
    coverage: np.ndarray
    boot_level_mean: np.ndarray
    mc_level: np.ndarray
    rejected_replicates: int

    def rows(self):
        """``(alpha, coverage, mean 1 - q_boot, 1 - q_mc)`` per alpha."""
        return [
            (a, c, 1.0 - b, 1.0 - m)
            for a, c, b, m in zip(self.alphas, self.coverage, self.boot_level_mean, self.mc_level)
        ]


def coverage_experiment(dgp, grid, alphas, M, B, scheme, rng, *, threads=1):
    """Fraction of M datasets whose bootstrap simultaneous set covers every target.

    Dataset m draws its responses from ``rng.child(DATA_STREAM)`` substream m
    and its multipliers from ``rng.child(BOOT_STREAM, m)``, so the result does
    not depend on ``threads``.
    """
    if M < 1 or B < 1:
        raise ValueError("M and B must be >= 1")
    alphas = np.asarray(alphas, dtype=np.float64).reshape(-1)
    design = GridDesign(grid, dgp.x)
    theta_star = design.target_local(dgp)
    data_rng = rng.child(DATA_STREAM)

    def one(m):
        data = sample_dataset(dgp, data_rng, m)
        lr = build_lr_matrix(data, grid, B, scheme, rng.child(BOOT_STREAM, m), design=design)
        s_true = true_sqrt_lr(design, data.y, theta_star)
        covered = np.empty(alphas.size, dtype=bool)
        levels = np.empty(alphas.size)
        for i, a in enumerate(alphas):
            corr = multiplicity_correction(lr, a)
            covered[i] = np.all(s_true <= corr.critical_values)
            levels[i] = corr.level
        return s_true, covered, levels, lr.rejected_replicates

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(M)))
    else:
        results = [one(m) for m in range(M)]

    s_true = np.column_stack([r[0] for r in results])
    covered = np.array([r[1] for r in results])
    levels = np.array([r[2] for r in results])
    true_lr = LrMatrix(s_true)
    mc = np.array(
        [mc_correction(true_lr, a).level if level_count(a, M) >= 1 else np.nan for a in alphas]
    )
    return CoverageReport(
        alphas=alphas,
        M=M,
        B=B,
        coverage=covered.mean(axis=0),
        boot_level_mean=levels.mean(axis=0),
        mc_level=mc,
        rejected_replicates=int(sum(r[3] for r in results)),
    )
