"""Modelling-bias and Wilks diagnostics for the quadratic families.

For model k with target ``theta*`` and per-observation score ``grad l_i``:

* ``D2`` -- curvature ``sum Psi_i Psi_i^T w_i``
* ``H2`` -- score variance ``sum Psi_i Psi_i^T w_i^2 E(Y_i - Psi_i theta*)^2``
* ``B2`` -- squared score means ``sum Psi_i Psi_i^T w_i^2 (f(X_i) - Psi_i theta*)^2``

The bias norm is the spectral norm of ``H^{-1} B2 H^{-1}``; it vanishes when
the local model is correct and approaches one when bias dominates the noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularH2
from .linalg import spectral_norm_sym, sym_inv_sqrt
from .models import Family, GridDesign, lc_fit, loglik_ratio, lq_fit, quadratic_basis


@dataclass(frozen=True)
class BiasDiagnostics:
    """Per-model matrices in the raw parametrisation plus the bias norms."""

    D2: np.ndarray
    H2: np.ndarray
    B2: np.ndarray
    bias_norm: np.ndarray


def _local_moments(design, dgp, k):
    """Curvature, score variance and bias matrices of model k in the local basis."""
    fx = dgp.mean()
    w = design.W[k]
    theta_star = design.target_local(dgp)
    if design.family is Family.LC:
        basis = np.ones((design.n, 1))
        mean_star = np.full(design.n, theta_star[k])
    else:
        basis = quadratic_basis(design.t[k])
        mean_star = basis @ theta_star[k]
    bias2 = (fx - mean_star) ** 2
    outer_w2 = basis.T * (w * w)
    d2 = basis.T @ (basis * w[:, None])
    h2 = outer_w2 @ (basis * (bias2 + dgp.noise_sd**2)[:, None])
    b2 = outer_w2 @ (basis * bias2[:, None])
    return d2, h2, b2


def _bias_norm_from(h2, b2):
    if h2.shape == (1, 1):
        if not h2[0, 0] > 0:
            raise SingularH2("score variance is zero")
        return float(b2[0, 0] / h2[0, 0])
    h_inv = sym_inv_sqrt(h2)
    if h_inv is None:
        raise SingularH2("score variance matrix is not positive definite")
    return spectral_norm_sym(h_inv @ b2 @ h_inv)


def bias_norm_lc(dgp, grid, k, *, design=None):
    """``sum w^2 (f - theta*)^2 / sum w^2 ((f - theta*)^2 + sigma^2)`` for center k."""
    if grid.family is not Family.LC:
        raise ValueError("bias_norm_lc needs a local constant grid")
    design = design or GridDesign(grid, dgp.x)
    _, h2, b2 = _local_moments(design, dgp, k)
    return _bias_norm_from(h2, b2)


def bias_norm_lq(dgp, grid, k, *, design=None):
    """Spectral norm of ``H^{-1} B2 H^{-1}`` for the local quadratic model k.

    Evaluated in the local basis; the norm is invariant under the change of
    parametrisation.
    """
    if grid.family is not Family.LQ:
        raise ValueError("bias_norm_lq needs a local quadratic grid")
    design = design or GridDesign(grid, dgp.x)
    _, h2, b2 = _local_moments(design, dgp, k)
    return _bias_norm_from(h2, b2)


def bias_diagnostics(dgp, grid):
    if grid.family is Family.QT:
        raise ValueError("bias diagnostics are defined for the regression families only")
    design = GridDesign(grid, dgp.x)
    d2s, h2s, b2s, norms = [], [], [], []
    for k in range(grid.K):
        d2, h2, b2 = _local_moments(design, dgp, k)
        norms.append(_bias_norm_from(h2, b2))
        if grid.family is Family.LQ:
            # local -> raw basis: M_raw = T^{-1} M_loc T^{-T}
            t_inv = np.linalg.inv(design.transforms[k])
            d2, h2, b2 = (t_inv @ m @ t_inv.T for m in (d2, h2, b2))
        d2s.append(d2)
        h2s.append(h2)
        b2s.append(b2)
    return BiasDiagnostics(np.array(d2s), np.array(h2s), np.array(b2s), np.array(norms))


def _standardise(x, w):
    c = float(w @ x / w.sum())
    s = float(np.max(np.abs(x[w > 0] - c))) or 1.0
    return (x - c) / s, c, s


def score_vector(family, data, w, theta_star):
    """Normalised score ``xi = D^{-1} grad L(theta*)``.

    For the local quadratic family ``xi`` is expressed in an orthonormalised
    standardised basis; only its norm is parametrisation free.
    """
    family = Family(family)
    w = np.asarray(w, dtype=np.float64)
    theta_star = np.asarray(theta_star, dtype=np.float64).reshape(-1)
    if family is Family.LC:
        d2 = w.sum()
        return np.array([w @ (data.y - theta_star[0]) / np.sqrt(d2)])
    if family is not Family.LQ:
        raise ValueError("the score vector is defined for the quadratic families only")
    t, c, s = _standardise(data.x, w)
    basis = quadratic_basis(t)
    resid = data.y - quadratic_basis(data.x) @ theta_star
    g = basis.T @ (w * resid)
    d_inv = sym_inv_sqrt(basis.T @ (basis * w[:, None]))
    if d_inv is None:
        raise SingularH2("curvature matrix is not positive definite")
    return d_inv @ g


def wilks_residual(family, data, w, theta_star):
    """``|sqrt(2 (L(theta_hat) - L(theta*))) - ||xi|||``; zero up to rounding for quadratic losses."""
    family = Family(family)
    if not family.quadratic:
        raise ValueError("the Wilks identity check needs a quadratic family")
    fit = (lc_fit if family is Family.LC else lq_fit)(data, w)
    lr = loglik_ratio(family, fit.theta_hat, theta_star, data, w)
    xi = score_vector(family, data, w, theta_star)
    return abs(np.sqrt(max(2.0 * lr, 0.0)) - float(np.linalg.norm(xi)))
