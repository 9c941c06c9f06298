"""The four experiments behind the CLI; each returns ``(header, rows)``."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import read_two_columns
from .diagnostics import bias_diagnostics
from .engine import build_lr_matrix, multiplicity_correction, simultaneous_band
from .errors import ConfigError
from .models import Dataset, Family, GridDesign
from .oracle import coverage_experiment, mc_correction, sample_dataset, true_lr_matrix
from .rng import BOOT_REP_DATA_STREAM, BOOT_REP_STREAM, BOOT_STREAM, DATA_STREAM, MC_REP_STREAM

BAND_HEADER = ["center", "theta_hat", "lower", "upper", "critical_value", "target_theta_star"]
COVERAGE_HEADER = ["alpha", "coverage_frequency", "mean_corrected_level_bootstrap"]
CORRECTION_HEADER = ["alpha", "mc_corrected_level", "bootstrap_corrected_level"]
BIAS_HEADER = ["center", "bias_norm", "band_width_bootstrap", "band_width_mc"]


def _map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def run_band(cfg):
    grid = cfg.grid()
    rng = cfg.rng()
    if cfg.data is not None:
        x, y = read_two_columns(cfg.data, "data")
        data = Dataset(x, y)
        target = np.full(grid.K, np.nan)
    else:
        dgp = cfg.dgp_spec()
        data = sample_dataset(dgp, rng.child(DATA_STREAM), 0)
        design = GridDesign(grid, data.x)
        target = design.fitted_value(design.target_local(dgp))
    band = simultaneous_band(data, grid, cfg.band_alpha, cfg.b, cfg.weight_scheme, rng.child(BOOT_STREAM, 0))
    rows = zip(band.locations, band.estimate, band.lower, band.upper, band.critical_values, target)
    return BAND_HEADER, [list(r) for r in rows]


def run_coverage(cfg):
    report = coverage_experiment(
        cfg.dgp_spec(), cfg.grid(), cfg.alphas, cfg.m, cfg.b, cfg.weight_scheme, cfg.rng(),
        threads=cfg.threads,
    )
    rows = [[a, cov, 1.0 - q] for a, cov, q in zip(report.alphas, report.coverage, report.boot_level_mean)]
    return COVERAGE_HEADER, rows


def correction_levels(cfg):
    """Mean corrected confidence ``1 - q`` over ``reps`` Monte-Carlo and bootstrap runs.

    Returns two arrays over ``cfg.alphas``: (MC, bootstrap).
    """
    dgp, grid, rng = cfg.dgp_spec(), cfg.grid(), cfg.rng()
    design = GridDesign(grid, dgp.x)
    alphas = cfg.alphas

    def mc_rep(r):
        lr = true_lr_matrix(dgp, grid, cfg.m, rng.child(MC_REP_STREAM, r), design=design)
        return [mc_correction(lr, a).level for a in alphas]

    def boot_rep(r):
        data = sample_dataset(dgp, rng.child(BOOT_REP_DATA_STREAM), r)
        lr = build_lr_matrix(data, grid, cfg.b, cfg.weight_scheme, rng.child(BOOT_REP_STREAM, r), design=design)
        return [multiplicity_correction(lr, a).level for a in alphas]

    mc = np.array(_map(mc_rep, range(cfg.reps), cfg.threads))
    boot = np.array(_map(boot_rep, range(cfg.reps), cfg.threads))
    return 1.0 - mc.mean(axis=0), 1.0 - boot.mean(axis=0)


def run_correction(cfg):
    mc, boot = correction_levels(cfg)
    return CORRECTION_HEADER, [[a, m, b] for a, m, b in zip(cfg.alphas, mc, boot)]


def run_bias(cfg):
    grid = cfg.grid()
    if grid.family is Family.QT:
        raise ConfigError("bias diagnostics need family lc or lq", key="family")
    dgp, rng = cfg.dgp_spec(), cfg.rng()
    design = GridDesign(grid, dgp.x)
    diag = bias_diagnostics(dgp, grid)
    data = sample_dataset(dgp, rng.child(DATA_STREAM), 0)
    band = simultaneous_band(
        data, grid, cfg.band_alpha, cfg.b, cfg.weight_scheme, rng.child(BOOT_STREAM, 0), design=design
    )
    true_lr = true_lr_matrix(dgp, grid, cfg.m, rng.child(MC_REP_STREAM, 0), design=design)
    z_mc = mc_correction(true_lr, cfg.band_alpha).critical_values
    width_mc = 2.0 * z_mc * design.band_scale()
    width_boot = band.upper - band.lower
    rows = zip(grid.centers, diag.bias_norm, width_boot, width_mc)
    return BIAS_HEADER, [list(r) for r in rows]


COMMANDS = {
    "band": run_band,
    "coverage": run_coverage,
    "correction": run_correction,
    "bias": run_bias,
}
