"""Kernel weights and the three local model families.

* local constant (Nadaraya-Watson): ``L(t) = -1/2 sum w_i (Y_i - t)^2``
* local quadratic: same loss with mean ``(1, X_i, X_i^2) . theta``
* quantile location: ``L(t) = -sum rho_tau(Y_i - t)`` with the check loss

Every likelihood can be reweighted by bootstrap multipliers ``u``; passing
``u=None`` means unit weights.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from statistics import NormalDist
from typing import Optional

import numpy as np

from .errors import (
    DegenerateWeights,
    DimensionMismatch,
    InvalidTau,
    NegativeMultiplier,
    NonPositiveCurvature,
)
from .linalg import ldl_factor

EPS_W = 1e-12
EPANECHNIKOV_CONST = 0.75


class Family(str, enum.Enum):
    LC = "lc"
    LQ = "lq"
    QT = "qt"

    @property
    def dim(self):
        return 3 if self is Family.LQ else 1

    @property
    def quadratic(self):
        return self is not Family.QT


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64).reshape(-1)
        y = np.ascontiguousarray(self.y, dtype=np.float64).reshape(-1)
        if x.shape != y.shape or x.size < 1:
            raise DimensionMismatch(f"x and y must have equal length >= 1, got {x.size}, {y.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("x and y must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.x.size


@dataclass(frozen=True)
class KernelSpec:
    bandwidth: float
    family: str = "epanechnikov"

    def __post_init__(self):
        if self.family != "epanechnikov":
            raise ValueError(f"unsupported kernel {self.family!r}")
        if not (self.bandwidth > 0 and np.isfinite(self.bandwidth)):
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")


@dataclass(frozen=True)
class ModelGrid:
    """K local models: kernel-weighted regressions at ``centers`` or quantile levels ``taus``."""

    family: Family
    centers: Optional[np.ndarray] = None
    kernel: Optional[KernelSpec] = None
    taus: Optional[np.ndarray] = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if fam is Family.QT:
            taus = np.asarray(self.taus, dtype=np.float64).reshape(-1)
            if taus.size < 1:
                raise ValueError("quantile grid needs at least one tau")
            if not np.all((taus > 0) & (taus < 1)):
                raise InvalidTau("every tau must lie in (0, 1)")
            object.__setattr__(self, "taus", taus)
            return
        if self.kernel is None:
            raise ValueError("regression families need a kernel")
        centers = np.asarray(self.centers, dtype=np.float64).reshape(-1)
        if centers.size < 1 or not np.all(np.isfinite(centers)):
            raise ValueError("need at least one finite center")
        if np.any(np.diff(centers) <= 0):
            raise ValueError("centers must be strictly increasing")
        object.__setattr__(self, "centers", centers)

    @classmethod
    def equidistant(cls, family, k, bandwidth):
        """``k`` equidistant centers on [0, 1] (or ``k`` interior quantile levels)."""
        family = Family(family)
        if family is Family.QT:
            return cls(family, taus=np.arange(1, k + 1) / (k + 1))
        return cls(family, centers=np.linspace(0.0, 1.0, k), kernel=KernelSpec(bandwidth))

    @property
    def K(self):
        return self.taus.size if self.family is Family.QT else self.centers.size

    @property
    def locations(self):
        """Centers for regression grids, tau levels for the quantile grid."""
        return self.taus if self.family is Family.QT else self.centers


@dataclass(frozen=True)
class FitResult:
    theta_hat: np.ndarray
    max_loglik: float
    curvature: Optional[np.ndarray] = None


def kernel_value(u):
    """Epanechnikov kernel ``0.75 (1 - u^2)`` on [-1, 1], zero outside."""
    u = np.asarray(u, dtype=np.float64)
    out = np.where(np.abs(u) <= 1.0, EPANECHNIKOV_CONST * (1.0 - u * u), 0.0)
    return float(out) if out.ndim == 0 else out


def local_weights(center, kernel, data):
    x = data.x if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    w = kernel_value((center - x) / kernel.bandwidth)
    w = np.atleast_1d(w)
    if w.sum() < EPS_W * w.size:
        raise DegenerateWeights(f"no design points inside the kernel support around {center}")
    return w


def _unit_or(u, n):
    if u is None:
        return np.ones(n)
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if u.size != n:
        raise DimensionMismatch(f"multiplier vector has length {u.size}, expected {n}")
    return u


def lc_fit(data, w, u=None):
    w = np.asarray(w, dtype=np.float64)
    u = _unit_or(u, data.n)
    wsum = w.sum()
    if wsum < EPS_W * w.size:
        raise DegenerateWeights("kernel weights sum to zero")
    wu = w * u
    s = wu.sum()
    if not s > EPS_W * wsum:
        raise NonPositiveCurvature(f"weighted curvature {s} is not positive")
    theta = np.array([wu @ data.y / s])
    return FitResult(theta, loglik(Family.LC, theta, data, w, u), np.array([[s]]))


def quadratic_basis(x):
    x = np.asarray(x, dtype=np.float64)
    return np.stack([np.ones_like(x), x, x * x], axis=-1)


def _local_transform(c, s):
    """``T`` with ``(1, t, t^2) = T (1, X, X^2)`` for ``t = (X - c)/s``."""
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [-c / s, 1.0 / s, 0.0],
            [c * c / (s * s), -2.0 * c / (s * s), 1.0 / (s * s)],
        ]
    )


def lq_fit(data, w, u=None):
    """Weighted least squares on ``(1, X, X^2)``.

    The system is solved in a centred and scaled basis (same likelihood, better
    conditioning) and mapped back; ``curvature`` is reported in the raw basis.
    """
    w = np.asarray(w, dtype=np.float64)
    u = _unit_or(u, data.n)
    if w.sum() < EPS_W * w.size:
        raise DegenerateWeights("kernel weights sum to zero")
    wu = w * u
    active = wu != 0.0
    if not active.any():
        raise NonPositiveCurvature("all effective weights are zero")
    aw = np.abs(wu)
    c = float(aw @ data.x / aw.sum())
    s = float(np.max(np.abs(data.x[active] - c))) or 1.0
    t = (data.x - c) / s
    basis_c = quadratic_basis(t)
    m_c = basis_c.T @ (basis_c * wu[:, None])
    theta_c = ldl_factor(m_c).solve(basis_c.T @ (wu * data.y))
    theta = _local_transform(c, s).T @ theta_c
    basis = quadratic_basis(data.x)
    curvature = basis.T @ (basis * wu[:, None])
    return FitResult(theta, loglik(Family.LQ, theta, data, w, u), curvature)


def _check_tau(tau):
    if not 0.0 < tau < 1.0:
        raise InvalidTau(f"tau must lie in (0, 1), got {tau}")


def weighted_quantile_index(u_sorted, tau):
    """Index of the smallest order statistic whose cumulative weight reaches ``tau * total``."""
    cum = np.cumsum(u_sorted)
    return int(np.searchsorted(cum, tau * cum[-1], side="left"))


def qt_fit(data, tau, u=None):
    _check_tau(tau)
    u = _unit_or(u, data.n)
    if np.any(u < 0):
        raise NegativeMultiplier("quantile fits need nonnegative multipliers")
    if not u.sum() > 0:
        raise NonPositiveCurvature("multipliers sum to zero")
    order = np.argsort(data.y, kind="stable")
    j = weighted_quantile_index(u[order], tau)
    theta = np.array([data.y[order][min(j, data.n - 1)]])
    return FitResult(theta, loglik(Family.QT, theta, data, None, u, tau=tau), None)


def check_loss(r, tau):
    r = np.asarray(r, dtype=np.float64)
    return r * (tau - (r < 0))


def _theta_vec(family, theta):
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    if theta.size != family.dim:
        raise DimensionMismatch(f"{family.value} needs a parameter of length {family.dim}, got {theta.size}")
    return theta


def _mean(family, theta, x):
    if family is Family.LQ:
        return quadratic_basis(x) @ theta
    return np.full(x.shape, theta[0])


def loglik(family, theta, data, w=None, u=None, *, tau=None):
    """``sum_i l_i(theta) u_i``; ``w`` is ignored by the quantile family."""
    family = Family(family)
    theta = _theta_vec(family, theta)
    u = _unit_or(u, data.n)
    if family is Family.QT:
        _check_tau(tau)
        return float(-np.sum(check_loss(data.y - theta[0], tau) * u))
    w = np.asarray(w, dtype=np.float64)
    r = data.y - _mean(family, theta, data.x)
    return float(-0.5 * np.sum(r * r * w * u))


def loglik_ratio(family, theta_a, theta_b, data, w=None, u=None, *, tau=None):
    """``L(theta_a) - L(theta_b)`` accumulated term by term.

    For the quadratic families each term is factored as ``d (2 r - d)`` with
    ``d`` the mean difference, formed from the parameter difference, and ``r``
    the residual at ``theta_b``; nearby or large parameters then do not lose
    precision to cancellation.
    """
    family = Family(family)
    ta, tb = _theta_vec(family, theta_a), _theta_vec(family, theta_b)
    u = _unit_or(u, data.n)
    if family is Family.QT:
        _check_tau(tau)
        diff = check_loss(data.y - tb[0], tau) - check_loss(data.y - ta[0], tau)
        return float(np.sum(diff * u))
    w = np.asarray(w, dtype=np.float64)
    d = _mean(family, ta - tb, data.x)
    r = data.y - _mean(family, tb, data.x)
    terms = d * (2.0 * r - d)
    return float(0.5 * np.sum(terms * w * u))


def target_params(dgp, grid):
    """KL-projection targets ``theta*_k`` under the known mean ``f`` of ``dgp``."""
    design = GridDesign(grid, dgp.x)
    return design.to_original(design.target_local(dgp))


class GridDesign:
    """Per-grid quantities that do not depend on the responses.

    Regression families carry the K x n weight matrix. The local quadratic
    family works in the local basis ``(1, t, t^2)`` with ``t = (X - x_k)/h``,
    which leaves every likelihood ratio unchanged and keeps the 3x3 systems
    well conditioned; ``to_original`` maps parameters back to ``(1, X, X^2)``.
    """

    def __init__(self, grid, x):
        self.grid = grid
        self.family = grid.family
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        self.n = self.x.size
        self.K = grid.K
        if self.family is Family.QT:
            self.taus = grid.taus
            return
        h = grid.kernel.bandwidth
        self.W = np.vstack([local_weights(c, grid.kernel, self.x) for c in grid.centers])
        self.sw = self.W.sum(axis=1)
        if self.family is Family.LC:
            return
        t = (self.x[None, :] - grid.centers[:, None]) / h
        self.t = t
        # rows: W t^r for r = 0..4, stacked model-major within each power
        self.moment_rows = np.vstack([self.W * t**r for r in range(5)])
        mu = self.moment_rows.reshape(5, self.K, self.n).sum(axis=2)
        self.D = np.empty((self.K, 3, 3))
        for a in range(3):
            for b in range(3):
                self.D[:, a, b] = mu[a + b]
        self.factors = [ldl_factor(dk) for dk in self.D]
        self.transforms = np.stack([_local_transform(c, h) for c in grid.centers])
        self.basis_rows = self.moment_rows[: 3 * self.K]

    def check(self, data):
        if data.n != self.n or not np.array_equal(data.x, self.x):
            raise DimensionMismatch("dataset design does not match the precomputed grid design")

    def fit(self, y):
        """Data-world estimates in local coordinates.

        ``y`` of shape (n,) gives (K,) for LC/QT and (K, 3) for LQ; a matrix of
        M response columns adds a trailing axis.
        """
        y = np.asarray(y, dtype=np.float64)
        if self.family is Family.LC:
            return (self.W @ y) / (self.sw if y.ndim == 1 else self.sw[:, None])
        if self.family is Family.LQ:
            rhs = (self.basis_rows @ y).reshape((3, self.K) + y.shape[1:])
            rhs = np.moveaxis(rhs, 0, 1)
            return np.stack([f.solve(r) for f, r in zip(self.factors, rhs)])
        cols = y[:, None] if y.ndim == 1 else y
        srt = np.sort(cols, axis=0)
        # same rule as qt_fit with unit weights: first j with j + 1 >= tau * n
        idx = np.clip(np.ceil(self.taus * self.n).astype(int) - 1, 0, self.n - 1)
        out = srt[idx]
        return out[:, 0] if y.ndim == 1 else out

    def target_local(self, dgp):
        fx = dgp.mean()
        if self.family is Family.QT:
            level = dgp.constant_level
            if level is None:
                raise ValueError("the quantile family needs a constant mean function")
            z = np.array([NormalDist().inv_cdf(t) for t in self.taus])
            return level + dgp.noise_sd * z
        return self.fit(fx)

    def to_original(self, theta_local):
        if self.family is not Family.LQ:
            return theta_local
        return np.einsum("kba,kb...->ka...", self.transforms, theta_local)

    def fitted_value(self, theta_local):
        """Fitted mean at each model's location."""
        return theta_local[:, 0] if self.family is Family.LQ else theta_local

    def residuals(self, y, theta_local):
        """(K, n) residuals of a single response vector."""
        if self.family is Family.LC:
            return y[None, :] - theta_local[:, None]
        th = theta_local
        return y[None, :] - (th[:, 0:1] + th[:, 1:2] * self.t + th[:, 2:3] * self.t**2)

    def band_scale(self):
        """Half-width of the likelihood set for the fitted value per unit critical value."""
        if self.family is Family.LC:
            return 1.0 / np.sqrt(self.sw)
        return np.sqrt([f.inverse()[0, 0] for f in self.factors])

    def sqrt_lr(self, y, theta_local_star):
        """``sqrt(2 (L_k(theta_hat) - L_k(theta*)))`` for one or many response columns.

        Uses the exact quadratic identity ``2 LR = g^T D^{-1} g`` with the score
        ``g = grad L(theta*)``.
        """
        y = np.asarray(y, dtype=np.float64)
        many = y.ndim == 2
        if self.family is Family.LC:
            ts = theta_local_star[:, None] if many else theta_local_star
            sw = self.sw[:, None] if many else self.sw
            g = self.W @ y - sw * ts
            return np.abs(g) / np.sqrt(sw)
        if self.family is Family.LQ:
            rhs = (self.basis_rows @ y).reshape((3, self.K) + y.shape[1:])
            rhs = np.moveaxis(rhs, 0, 1)
            dts = np.einsum("kab,kb->ka", self.D, theta_local_star)
            g = rhs - (dts[:, :, None] if many else dts)
            q = np.stack([np.einsum("a...,a...->...", gk, f.solve(gk)) for f, gk in zip(self.factors, g)])
            return np.sqrt(np.maximum(q, 0.0))
        raise TypeError("use quantile helpers for the quantile family")
